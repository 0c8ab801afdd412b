//! Corrections for `y' + B(x) y = (g(x) - φ(x)) / Q(x)`.
//!
//! Given `g`, there is a unique vector polynomial `φ` of degree `≤ S` making
//! the equation solvable with `y` analytic at every pole. For polynomial `g`
//! both `φ` and `y` are found by expanding `g` in the shifted family `P̃̃_n`:
//! the identity `Q P_n' + Q B P_n = P̃̃_{n+S+1}` turns the expansion
//! `g = Σ P̃̃_n g_n` into `φ = Σ_{n≤S} x^n g_n`, `y = Σ_{n>S} P_{n-S-1} g_n`.

use crate::error::{Error, Result};
use crate::fuchsian::{check_linear_assumption, FuchsianSystem, RESONANCE_TOL};
use crate::matrix::{solve_linear, vector};
use crate::poly::{MatPoly, VecPoly};
use crate::rhs::{reciprocal_linear_series, reciprocal_product_series, scalar_times_vector_series, SeriesProvider};
use crate::rodrigues::{shifted_family, RodriguesFamily};
use crate::scalar::Scalar;

/// `φ` and the polynomial solution `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionResult<T> {
    pub phi: VecPoly<T>,
    pub y: VecPoly<T>,
}

/// Reusable solver holding the Rodrigues families of one system.
#[derive(Clone)]
pub struct PolynomialSolver<T> {
    family: RodriguesFamily<T>,
    shifted: RodriguesFamily<T>,
}

impl<T: Scalar> PolynomialSolver<T> {
    pub fn new(system: FuchsianSystem<T>) -> Self {
        let shifted = RodriguesFamily::new(shifted_family(&system));
        Self { family: RodriguesFamily::new(system), shifted }
    }

    pub fn system(&self) -> &FuchsianSystem<T> {
        self.family.system()
    }

    pub fn solve(&mut self, g: &VecPoly<T>, tol: f64) -> Result<CorrectionResult<T>> {
        let size = self.system().dim();
        if g.dim() != size {
            return Err(Error::Shape(format!("right-hand side of dimension {}, system of size {size}", g.dim())));
        }
        let s = self.system().s();
        let g = g.trimmed(tol);
        match g.degree() {
            None => return Ok(CorrectionResult { phi: VecPoly::zero(size), y: VecPoly::zero(size) }),
            Some(d) if d <= s => return Ok(CorrectionResult { phi: g, y: VecPoly::zero(size) }),
            Some(_) => {}
        }
        let coeffs = self.shifted.expand(&g, tol)?;
        let phi = VecPoly::new(size, coeffs.iter().take(s + 1).cloned().collect())?;
        let y = self.family.synthesize(&coeffs[s + 1..]);
        Ok(CorrectionResult { phi, y })
    }
}

/// One-shot form of [`PolynomialSolver::solve`].
pub fn solve_polynomial<T: Scalar>(sys: &FuchsianSystem<T>, g: &VecPoly<T>, tol: f64) -> Result<CorrectionResult<T>> {
    PolynomialSolver::new(sys.clone()).solve(g, tol)
}

/// `Q y' + (Q B) y - (g - φ)`: identically zero for a solution.
pub fn residual<T: Scalar>(sys: &FuchsianSystem<T>, g: &VecPoly<T>, phi: &VecPoly<T>, y: &VecPoly<T>) -> VecPoly<T> {
    y.derivative()
        .mul_scalar_poly(&sys.q_poly())
        .add(&sys.q_times_b().mul_vec(y))
        .sub(&g.sub(phi))
}

/// Truncated analytic solution around a pole.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorSolution<T> {
    pub pole: usize,
    pub center: T,
    /// `y_k`, coefficient of `(x - center)^k`.
    pub coeffs: Vec<Vec<T>>,
}

impl<T: Scalar> TaylorSolution<T> {
    pub fn eval(&self, x: &T) -> Vec<T> {
        let t = x.clone() - &self.center;
        let dim = self.coeffs.first().map_or(0, Vec::len);
        self.coeffs.iter().rev().fold(vector::zeros(dim), |acc, c| vector::add(&vector::scale(&acc, &t), c))
    }
}

/// The unique solution of `y' + B y = g / Q` analytic at `p_j`, to order
/// `order` in `x - p_j`. Here `g` is the full right-hand side numerator, so
/// `B_j y_0` equals the residue of `g / Q` at `p_j`.
pub fn local_taylor<T: Scalar>(
    sys: &FuchsianSystem<T>,
    j: usize,
    g: &dyn SeriesProvider<T>,
    order: usize,
    tol: f64,
) -> Result<TaylorSolution<T>> {
    let poles = sys.poles();
    if j >= poles.len() {
        return Err(Error::Invalid(format!("pole index {j} out of range")));
    }
    let size = sys.dim();
    if g.dim() != size {
        return Err(Error::Shape(format!("right-hand side of dimension {}, system of size {size}", g.dim())));
    }
    let pj = &poles[j];
    let others: Vec<usize> = (0..poles.len()).filter(|&k| k != j).collect();
    let inv_qj = reciprocal_product_series(pj, others.iter().map(|&k| &poles[k]), order);
    let r = scalar_times_vector_series(&inv_qj, &g.taylor(pj, order), order);
    // 1/(x - p_k) = Σ_l (-1)^l t^l / (p_j - p_k)^{l+1}
    let expansions: Vec<Vec<T>> =
        others.iter().map(|&k| reciprocal_linear_series(&(pj.clone() - &poles[k]), order)).collect();
    let bj = &sys.residues()[j];
    let mut coeffs: Vec<Vec<T>> = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut rhs = r[k].clone();
        for (idx, &other) in others.iter().enumerate() {
            let bk = &sys.residues()[other];
            for l in 0..k {
                let term = bk.mul_vec(&coeffs[k - 1 - l]);
                rhs = vector::sub(&rhs, &vector::scale(&term, &expansions[idx][l]));
            }
        }
        let lhs = bj.shift(&T::from_i64(k as i64));
        let yk = solve_linear(&lhs, &rhs, tol)
            .map_err(|_| Error::Assumption(format!("{k} + B_{j} is singular")))?;
        coeffs.push(yk);
    }
    Ok(TaylorSolution { pole: j, center: pj.clone(), coeffs })
}

/// Affine data of one rung of the shift ladder: `y = y0 + Q ỹ` maps
/// solutions of the shifted problem to solutions of the original one.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftStep<T> {
    /// Residues `B_j + I`.
    pub system: FuchsianSystem<T>,
    pub y0: VecPoly<T>,
}

/// `y0 = Σ_j (Q_j(x) / Q'(p_j)) B_j⁻¹ g_j`, the interpolant taking the
/// values `B_j⁻¹ g_j` at the poles, where `g_j` is the residue of `g/Q`.
pub fn interpolate_y0<T: Scalar>(sys: &FuchsianSystem<T>, residues_of_rhs: &[Vec<T>], tol: f64) -> Result<VecPoly<T>> {
    let size = sys.dim();
    let mut y0 = VecPoly::zero(size);
    for (j, gj) in residues_of_rhs.iter().enumerate() {
        let v = solve_linear(&sys.residues()[j], gj, tol)
            .map_err(|_| Error::Assumption(format!("B_{j} is singular; cannot shift eigenvalues")))?;
        let basis = sys.q_without(j).scale(&sys.q_prime_at_pole(j).inv());
        y0 = y0.add(&VecPoly::constant(v).mul_scalar_poly(&basis));
    }
    Ok(y0)
}

/// Polynomial `(g_P - (Q B) y0) / Q`, the part of the shifted right-hand
/// side built from the interpolation data.
pub fn shifted_polynomial_part<T: Scalar>(
    sys: &FuchsianSystem<T>,
    g_p: &VecPoly<T>,
    y0: &VecPoly<T>,
    tol: f64,
) -> Result<VecPoly<T>> {
    let num = g_p.sub(&sys.q_times_b().mul_vec(y0));
    let (quot, rem) = num.div_rem(&sys.q_poly())?;
    if !rem.trimmed(tol * (1.0 + num.max_abs())).is_zero() {
        return Err(Error::Numeric("shift remainder is not divisible by Q".into()));
    }
    Ok(quot.sub(&y0.derivative()))
}

/// Raises every residue eigenvalue by one for a polynomial right-hand side.
///
/// With `g = g_P + Q g̃̃` (`deg g_P ≤ S+1`), the new right-hand side is
/// `g̃ = g̃̃ - y0' + (g_P - Q B y0) / Q`.
pub fn shift_up<T: Scalar>(sys: &FuchsianSystem<T>, g: &VecPoly<T>, tol: f64) -> Result<(ShiftStep<T>, VecPoly<T>)> {
    let (g_tt, g_p) = g.div_rem(&sys.q_poly())?;
    let residues: Vec<Vec<T>> = (0..sys.poles().len())
        .map(|j| vector::scale(&g_p.eval(&sys.poles()[j]), &sys.q_prime_at_pole(j).inv()))
        .collect();
    let y0 = interpolate_y0(sys, &residues, tol)?;
    let g_new = g_tt.add(&shifted_polynomial_part(sys, &g_p, &y0, tol)?);
    Ok((ShiftStep { system: sys.shifted(&T::one()), y0 }, g_new))
}

/// Transports a correction `φ̃` found on the shifted problem back down one
/// rung: solves `y1' + B y1 = (Q φ̃ - φ) / Q` and returns `(φ, y1)`. The
/// original solution is then `y = y0 + y1 + Q ỹ`.
pub fn pull_back_correction<T: Scalar>(
    sys: &FuchsianSystem<T>,
    phi_shifted: &VecPoly<T>,
    tol: f64,
) -> Result<(VecPoly<T>, VecPoly<T>)> {
    let r = solve_polynomial(sys, &phi_shifted.mul_scalar_poly(&sys.q_poly()), tol)?;
    Ok((r.phi, r.y))
}

/// Outcome of [`solution_uniqueness_check`].
#[derive(Clone, Debug, PartialEq)]
pub enum UniquenessCheck {
    Confirmed,
    Failed,
    Skipped(String),
}

/// For `deg g ≤ S` the only correction is `φ = g` with `y = 0`.
pub fn solution_uniqueness_check<T: Scalar>(sys: &FuchsianSystem<T>, g: &VecPoly<T>, tol: f64) -> UniquenessCheck {
    let report = match check_linear_assumption(sys, 0, RESONANCE_TOL) {
        Ok(r) => r,
        Err(e) => return UniquenessCheck::Skipped(e.to_string()),
    };
    if !report.passed {
        return UniquenessCheck::Skipped(format!("{} resonant residue factor(s)", report.violations.len()));
    }
    if g.trimmed(tol).degree().is_some_and(|d| d > sys.s()) {
        return UniquenessCheck::Skipped("right-hand side degree exceeds S".into());
    }
    match solve_polynomial(sys, g, tol) {
        Ok(r) if r.y.trimmed(tol).is_zero() && r.phi.sub(g).trimmed(tol).is_zero() => UniquenessCheck::Confirmed,
        Ok(_) => UniquenessCheck::Failed,
        Err(e) => UniquenessCheck::Skipped(e.to_string()),
    }
}

/// Smallest `n ≥ 0` such that every eigenvalue of every `B_j + n` has
/// positive real part (beyond `tol`).
pub fn shift_count<T: Scalar>(sys: &FuchsianSystem<T>, tol: f64) -> Result<usize> {
    let mut min_re = f64::INFINITY;
    for b in sys.residues() {
        for l in crate::matrix::mat_eigenvalues(b, tol)? {
            min_re = min_re.min(l.re);
        }
    }
    if min_re > tol {
        return Ok(0);
    }
    let mut n = (-min_re).floor().max(0.0) as usize + 1;
    if min_re + (n as f64) <= tol {
        n += 1;
    }
    Ok(n)
}

/// `Q P_n' + Q B P_n`, which equals `P̃̃_{n+S+1}`.
pub fn prototype_image<T: Scalar>(sys: &FuchsianSystem<T>, p: &MatPoly<T>) -> MatPoly<T> {
    p.derivative().mul_scalar_poly(&sys.q_poly()).add(&sys.q_times_b().mul(p))
}
