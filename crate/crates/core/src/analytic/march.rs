//! Taylor-series continuation of `W' = W B` along polylines, optionally
//! integrating `Q⁻¹ W G` on the way, plus the endpoint series at poles.

use std::sync::Arc;

use super::frobenius::frobenius_local;
use super::series::{coefficient_series, mat_series_mul, power_series, scalar_mat_series_mul};
use crate::error::{Error, Result};
use crate::fuchsian::FuchsianSystem;
use crate::matrix::{CMatrix, Matrix};
use crate::rhs::{reciprocal_product_series, SeriesProvider};
use crate::scalar::{Scalar, C64};

/// Largest Taylor order tried before a step is halved.
const MAX_STEP_ORDER: usize = 60;
/// Steps never exceed this fraction of the distance to the nearest pole.
const STEP_FRACTION: f64 = 0.4;

/// Right factor `G(x) = [I, x I, …, x^S I, g(x)]` of the moment integrands.
#[derive(Clone)]
pub(crate) struct Columns {
    pub powers: usize,
    pub dim: usize,
    pub rhs: Option<Arc<dyn SeriesProvider<C64>>>,
}

impl Columns {
    pub fn width(&self) -> usize {
        self.dim * self.powers + usize::from(self.rhs.is_some())
    }

    pub fn series(&self, center: C64, order: usize) -> Vec<CMatrix> {
        let n = self.dim;
        let mut out = vec![Matrix::zeros(n, self.width()); order + 1];
        for i in 0..self.powers {
            for (k, c) in power_series(center, i, order).into_iter().enumerate() {
                for r in 0..n {
                    out[k][(r, i * n + r)] = c;
                }
            }
        }
        if let Some(g) = &self.rhs {
            let col = self.width() - 1;
            for (k, v) in g.taylor(&center, order).into_iter().enumerate() {
                for r in 0..n {
                    out[k][(r, col)] = v[r];
                }
            }
        }
        out
    }
}

pub(crate) struct MarchOutput {
    pub w: CMatrix,
    pub integral: Option<CMatrix>,
    pub samples: Vec<(C64, CMatrix)>,
    pub error: f64,
}

pub(crate) fn nearest_pole_distance(sys: &FuchsianSystem<C64>, x: C64) -> f64 {
    sys.poles().iter().map(|p| (p - x).norm()).fold(f64::INFINITY, f64::min)
}

/// Distance from `p_j` to the nearest other pole.
pub(crate) fn nearest_pole_distance_excluding(sys: &FuchsianSystem<C64>, j: usize) -> f64 {
    let p = sys.poles()[j];
    sys.poles()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, q)| (q - p).norm())
        .fold(f64::INFINITY, f64::min)
}

fn truncation_eps(tol: f64) -> f64 {
    (tol * 1e-3).max(1e-16)
}

struct Step {
    w: CMatrix,
    integral: Option<CMatrix>,
    error: f64,
}

fn taylor_step(
    sys: &FuchsianSystem<C64>,
    c: C64,
    w0: &CMatrix,
    h: C64,
    cols: Option<&Columns>,
    tol: f64,
) -> Option<Step> {
    let eps = truncation_eps(tol);
    let bser = coefficient_series(sys, c, None, MAX_STEP_ORDER);
    let qg = cols.map(|cols| {
        let qinv = reciprocal_product_series(&c, sys.poles(), MAX_STEP_ORDER);
        scalar_mat_series_mul(&qinv, &cols.series(c, MAX_STEP_ORDER), MAX_STEP_ORDER)
    });
    let hn_abs = h.norm();
    let mut ws = vec![w0.clone()];
    let mut w_sum = w0.clone();
    let mut int_sum = qg.as_ref().map(|g| Matrix::zeros(w0.rows(), g[0].cols()));
    let mut hpow = C64::one();
    let scale_w = w0.max_abs().max(f64::MIN_POSITIVE);
    let mut scale_z: f64 = f64::MIN_POSITIVE;
    let mut quiet = 0;
    for n in 0..MAX_STEP_ORDER {
        if n > 0 {
            let mut next = Matrix::zeros(w0.rows(), w0.cols());
            for l in 0..n {
                next.add_assign(&ws[l].mul(&bser[n - 1 - l]));
            }
            let next = next.scale(&C64::new(1.0 / n as f64, 0.0));
            w_sum.add_assign(&next.scale(&hpow));
            ws.push(next);
        }
        let tw = ws[n].max_abs() * hn_abs.powi(n as i32);
        let mut tz = 0.0;
        if let (Some(qg), Some(acc)) = (&qg, int_sum.as_mut()) {
            let mut z = Matrix::zeros(w0.rows(), qg[0].cols());
            for a in 0..=n {
                z.add_assign(&ws[a].mul(&qg[n - a]));
            }
            let factor = hpow * h / (n as f64 + 1.0);
            let term = z.scale(&factor);
            tz = term.max_abs();
            scale_z = scale_z.max(tz);
            acc.add_assign(&term);
        }
        if n >= 6 && tw <= eps * scale_w && tz <= eps * scale_z {
            quiet += 1;
            if quiet == 2 {
                return Some(Step { w: w_sum, integral: int_sum, error: tw + tz });
            }
        } else {
            quiet = 0;
        }
        hpow *= h;
    }
    None
}

/// Continues `W` from `points[0]` through the remaining points.
pub(crate) fn march(
    sys: &FuchsianSystem<C64>,
    points: &[C64],
    w0: CMatrix,
    cols: Option<&Columns>,
    tol: f64,
) -> Result<MarchOutput> {
    let mut pos = points[0];
    let mut w = w0;
    let mut integral = cols.map(|c| Matrix::zeros(w.rows(), c.width()));
    let mut samples = vec![(pos, w.clone())];
    let mut error = 0.0;
    for &target in &points[1..] {
        while pos != target {
            let remaining = target - pos;
            let rho = nearest_pole_distance(sys, pos);
            let mut len = (STEP_FRACTION * rho).min(remaining.norm());
            loop {
                let full = len >= remaining.norm();
                let h = if full { remaining } else { remaining * (len / remaining.norm()) };
                if let Some(step) = taylor_step(sys, pos, &w, h, cols, tol) {
                    w = step.w;
                    if let (Some(acc), Some(piece)) = (integral.as_mut(), step.integral) {
                        acc.add_assign(&piece);
                    }
                    error += step.error;
                    pos = if full { target } else { pos + h };
                    samples.push((pos, w.clone()));
                    break;
                }
                len *= 0.5;
                if len < 1e-12 * (1.0 + pos.norm()) {
                    return Err(Error::Numeric(format!("step size underflow near {pos}")));
                }
            }
        }
    }
    Ok(MarchOutput { w, integral, samples, error })
}

/// Continues `W' = W B` from `(start, w_start)` through `points`, returning
/// `W` at every accepted step end.
pub fn continue_w(
    sys: &FuchsianSystem<C64>,
    start: (C64, CMatrix),
    points: &[C64],
    tol: f64,
) -> Result<Vec<(C64, CMatrix)>> {
    let mut all = vec![start.0];
    all.extend_from_slice(points);
    if all.iter().any(|&x| nearest_pole_distance(sys, x) == 0.0) {
        return Err(Error::Invalid("continuation points must avoid the poles".into()));
    }
    Ok(march(sys, &all, start.1, None, tol)?.samples)
}

pub(crate) struct Endpoint {
    /// `∫_0^ε t^{B-1} F(t) dt` for the Frobenius integrand at the pole.
    pub piece: CMatrix,
    /// `W_j(p_j + ε)` on the chosen branch.
    pub w: CMatrix,
    pub error: f64,
}

/// Endpoint contribution of `∫ Q⁻¹ W_j G` over the ray from `p_j` to
/// `p_j + offset`, integrating the Frobenius series term by term.
pub(crate) fn endpoint(
    sys: &FuchsianSystem<C64>,
    j: usize,
    offset: C64,
    anchor: f64,
    cols: &Columns,
    tol: f64,
) -> Result<Endpoint> {
    let eps_t = truncation_eps(tol);
    let p = sys.poles()[j];
    let radius = nearest_pole_distance_excluding(sys, j);
    let ratio = offset.norm() / radius;
    let mut order = ((eps_t.ln() / ratio.ln()).ceil() as usize + 10).min(400);
    loop {
        let local = frobenius_local(sys, j, order, tol)?;
        let others: Vec<C64> = sys.poles().iter().enumerate().filter(|&(k, _)| k != j).map(|(_, q)| *q).collect();
        let inv_qj = reciprocal_product_series(&p, &others, order);
        let hg = scalar_mat_series_mul(&inv_qj, &cols.series(p, order), order);
        let f = mat_series_mul(&local.phi_series, &hg, order);
        let b = &local.exponent;
        let mut sum = Matrix::zeros(b.rows(), cols.width());
        let mut tpow = C64::one();
        let mut last = 0.0;
        let mut scale: f64 = f64::MIN_POSITIVE;
        for (n, fnn) in f.iter().enumerate() {
            let term = b.shift(&C64::from_i64(n as i64)).solve_matrix(fnn, 1e-14)?.scale(&tpow);
            last = term.max_abs();
            scale = scale.max(last);
            sum.add_assign(&term);
            tpow *= offset;
        }
        if last > eps_t * scale && order < 400 {
            order = (order * 2).min(400);
            continue;
        }
        let power = local.power(p + offset, anchor);
        let w = power.mul(&local.phi_at(p + offset));
        let piece = power.mul(&sum);
        return Ok(Endpoint { piece, w, error: last });
    }
}
