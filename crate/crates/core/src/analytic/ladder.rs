//! Eigenvalue shifts for analytic right-hand sides.

use std::sync::Arc;

use crate::correction::{interpolate_y0, shift_up, shifted_polynomial_part, ShiftStep};
use crate::error::Result;
use crate::fuchsian::FuchsianSystem;
use crate::matrix::vector;
use crate::poly::VecPoly;
use crate::rhs::SeriesProvider;
use crate::scalar::{Scalar, C64};

/// `g̃ = (g - g_P) / Q + polynomial part`, where `g_P` interpolates `g` at
/// the poles so the quotient is analytic.
pub struct ShiftedRhs {
    inner: Arc<dyn SeriesProvider<C64>>,
    poles: Vec<C64>,
    interpolant: VecPoly<C64>,
    polynomial_part: VecPoly<C64>,
}

impl SeriesProvider<C64> for ShiftedRhs {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn taylor(&self, center: &C64, order: usize) -> Vec<Vec<C64>> {
        let mut q = vec![C64::one()];
        let mut at_pole = false;
        for p in &self.poles {
            let f = center - p;
            if f == C64::zero() {
                at_pole = true;
                continue;
            }
            let mut next = vec![C64::zero(); q.len() + 1];
            for (k, c) in q.iter().enumerate() {
                next[k] += c * f;
                next[k + 1] += c;
            }
            q = next;
        }
        let inner = self.inner.taylor(center, order + 1);
        let interp = self.interpolant.taylor(center, order + 1);
        let num: Vec<Vec<C64>> = inner.iter().zip(&interp).map(|(a, b)| vector::sub(a, b)).collect();
        let num = if at_pole { &num[1..] } else { &num[..order + 1] };
        let q0_inv = q[0].inv();
        let mut out: Vec<Vec<C64>> = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut acc = num[n].clone();
            for k in 1..=n.min(q.len() - 1) {
                acc = vector::sub(&acc, &vector::scale(&out[n - k], &q[k]));
            }
            out.push(vector::scale(&acc, &q0_inv));
        }
        let poly = self.polynomial_part.taylor(center, order);
        out.iter().zip(&poly).map(|(a, b)| vector::add(a, b)).collect()
    }
}

/// One rung of the shift ladder. Polynomial inputs stay polynomial.
pub fn shift_up_analytic(
    sys: &FuchsianSystem<C64>,
    g: Arc<dyn SeriesProvider<C64>>,
    tol: f64,
) -> Result<(ShiftStep<C64>, Arc<dyn SeriesProvider<C64>>)> {
    if let Some(p) = g.as_polynomial() {
        let (step, g_new) = shift_up(sys, &p, tol)?;
        return Ok((step, Arc::new(g_new)));
    }
    let residues: Vec<Vec<C64>> = sys
        .poles()
        .iter()
        .enumerate()
        .map(|(j, p)| vector::scale(&g.eval(p), &sys.q_prime_at_pole(j).inv()))
        .collect();
    let mut interpolant = VecPoly::zero(sys.dim());
    for (j, gj) in residues.iter().enumerate() {
        interpolant = interpolant.add(&VecPoly::constant(gj.clone()).mul_scalar_poly(&sys.q_without(j)));
    }
    let y0 = interpolate_y0(sys, &residues, tol)?;
    let polynomial_part = shifted_polynomial_part(sys, &interpolant, &y0, tol)?;
    let shifted = ShiftedRhs { inner: g, poles: sys.poles().to_vec(), interpolant, polynomial_part };
    Ok((ShiftStep { system: sys.shifted(&C64::one()), y0 }, Arc::new(shifted)))
}
