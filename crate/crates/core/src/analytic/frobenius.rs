//! Local fundamental solutions `W_j = (x - p_j)^{B_j} Φ_j(x)` of `W' = W B`.

use super::series::{arg_near, coefficient_series, eval_mat_series};
use crate::error::{Error, Result};
use crate::fuchsian::{FuchsianSystem, RESONANCE_TOL};
use crate::matrix::{mat_eigenvalues, matrix_power, solve_linear, CMatrix, Matrix};
use crate::scalar::{Scalar, C64};

/// Frobenius data at one pole: exponent `B_j` and the analytic factor
/// `Φ_j` with `Φ_j(p_j) = I`, as a truncated series in `x - p_j`.
#[derive(Clone, Debug)]
pub struct FundamentalSolution {
    pub pole: usize,
    pub center: C64,
    pub exponent: CMatrix,
    pub phi_series: Vec<CMatrix>,
    /// Distance to the nearest other pole; `Φ_j` converges inside it.
    pub radius: f64,
}

impl FundamentalSolution {
    pub fn phi_at(&self, x: C64) -> CMatrix {
        eval_mat_series(&self.phi_series, x - self.center)
    }

    /// `(x - p_j)^{B_j}` with `arg(x - p_j)` taken within `π` of `anchor`.
    pub fn power(&self, x: C64, anchor: f64) -> CMatrix {
        let t = x - self.center;
        matrix_power(&self.exponent, t.norm(), arg_near(t, anchor))
    }

    pub fn eval(&self, x: C64, anchor: f64) -> CMatrix {
        self.power(x, anchor).mul(&self.phi_at(x))
    }

    /// Largest coefficient mismatch in `n Φ_n + [B_j, Φ_n] = Σ_{l<n} Φ_l R_{n-1-l}`.
    pub fn recursion_residual(&self, sys: &FuchsianSystem<C64>) -> f64 {
        let order = self.phi_series.len() - 1;
        let r = coefficient_series(sys, self.center, Some(self.pole), order);
        let b = &self.exponent;
        let mut worst: f64 = 0.0;
        for n in 1..=order {
            let phi = &self.phi_series[n];
            let mut lhs = phi.scale(&C64::from_i64(n as i64)).add(&b.mul(phi)).sub(&phi.mul(b));
            for l in 0..n {
                lhs = lhs.sub(&self.phi_series[l].mul(&r[n - 1 - l]));
            }
            worst = worst.max(lhs.max_abs());
        }
        worst
    }
}

/// Rejects residues with two eigenvalues differing by a nonzero integer.
pub fn check_linear_nonresonance(sys: &FuchsianSystem<C64>, j: usize, tol: f64) -> Result<()> {
    let ev = mat_eigenvalues(&sys.residues()[j], tol)?;
    for a in &ev {
        for b in &ev {
            let d = a - b;
            let k = d.re.round();
            if k != 0.0 && (d - k).norm() <= RESONANCE_TOL {
                return Err(Error::LinearResonance { pole: j, a: format!("{a}"), b: format!("{b}") });
            }
        }
    }
    Ok(())
}

/// Frobenius factor at `p_j` to `order`, solving the commutator recursion
/// one Sylvester system per coefficient.
pub fn frobenius_local(sys: &FuchsianSystem<C64>, j: usize, order: usize, tol: f64) -> Result<FundamentalSolution> {
    if j >= sys.poles().len() {
        return Err(Error::Invalid(format!("pole index {j} out of range")));
    }
    check_linear_nonresonance(sys, j, tol)?;
    let n = sys.dim();
    let b = sys.residues()[j].clone();
    let r = coefficient_series(sys, sys.poles()[j], Some(j), order);
    // Row-major vec: vec(B X) = (B ⊗ I) vec X, vec(X B) = (I ⊗ Bᵀ) vec X.
    let mut commutator = Matrix::zeros(n * n, n * n);
    for row in 0..n {
        for col in 0..n {
            for k in 0..n {
                let v = commutator[(row * n + col, k * n + col)] + b[(row, k)];
                commutator[(row * n + col, k * n + col)] = v;
                let v = commutator[(row * n + col, row * n + k)] - b[(k, col)];
                commutator[(row * n + col, row * n + k)] = v;
            }
        }
    }
    let mut phi: Vec<CMatrix> = vec![Matrix::identity(n)];
    for k in 1..=order {
        let mut rhs = Matrix::zeros(n, n);
        for l in 0..k {
            rhs.add_assign(&phi[l].mul(&r[k - 1 - l]));
        }
        let op = commutator.shift(&C64::from_i64(k as i64));
        let x = solve_linear(&op, rhs.entries(), tol)
            .map_err(|_| Error::Numeric(format!("Frobenius recursion singular at order {k}, pole {j}")))?;
        phi.push(Matrix::from_row_major(n, n, x)?);
    }
    let center = sys.poles()[j];
    let radius = sys
        .poles()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, p)| (p - center).norm())
        .fold(f64::INFINITY, f64::min);
    Ok(FundamentalSolution { pole: j, center, exponent: b, phi_series: phi, radius })
}
