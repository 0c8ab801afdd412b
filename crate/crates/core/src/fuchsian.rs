//! Fuchsian linear parts and the standing nonresonance assumptions.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::{mat_eigenvalues, Matrix};
use crate::pn_space::MultiIndex;
use crate::poly::{MatPoly, Poly, VecPoly};
use crate::scalar::{ceil_nonneg, Scalar, C64};

/// Default gap required between resonance expressions and zero.
pub const RESONANCE_TOL: f64 = 1e-9;

/// Poles `p_0..p_{S+1}` and residues `B_0..B_{S+1}` of
/// `B(x) = Σ B_j / (x - p_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FuchsianSystem<T> {
    poles: Vec<T>,
    residues: Vec<Matrix<T>>,
}

/// Which residue matrix a report entry refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ResidueLabel {
    Pole(usize),
    Infinity,
}

impl fmt::Display for ResidueLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidueLabel::Pole(j) => write!(f, "{j}"),
            ResidueLabel::Infinity => write!(f, "inf"),
        }
    }
}

impl<T: Scalar> FuchsianSystem<T> {
    /// Validates and builds a system. Poles must be pairwise farther apart
    /// than `tol` (exactly distinct in exact mode).
    pub fn new(poles: Vec<T>, residues: Vec<Matrix<T>>, tol: f64) -> Result<Self> {
        if poles.len() < 2 {
            return Err(Error::Invalid(format!("need at least two poles, got {}", poles.len())));
        }
        if poles.len() != residues.len() {
            return Err(Error::Invalid(format!("{} poles but {} residue matrices", poles.len(), residues.len())));
        }
        let n = residues[0].rows();
        if residues.iter().any(|r| r.rows() != n || r.cols() != n) {
            return Err(Error::Shape(format!("all residues must be {n}x{n}")));
        }
        for a in 0..poles.len() {
            for b in a + 1..poles.len() {
                if (poles[a].clone() - &poles[b]).is_zero_tol(tol) {
                    return Err(Error::Invalid(format!("poles {a} and {b} coincide")));
                }
            }
        }
        Ok(Self { poles, residues })
    }

    pub fn poles(&self) -> &[T] {
        &self.poles
    }

    pub fn residues(&self) -> &[Matrix<T>] {
        &self.residues
    }

    pub fn residue(&self, label: ResidueLabel) -> Matrix<T> {
        match label {
            ResidueLabel::Pole(j) => self.residues[j].clone(),
            ResidueLabel::Infinity => self.b_infinity(),
        }
    }

    /// `S`, so that there are `S + 2` finite poles.
    pub fn s(&self) -> usize {
        self.poles.len() - 2
    }

    /// Size `N` of the residue matrices.
    pub fn dim(&self) -> usize {
        self.residues[0].rows()
    }

    pub fn labels(&self) -> impl Iterator<Item = ResidueLabel> {
        (0..self.poles.len()).map(ResidueLabel::Pole).chain(std::iter::once(ResidueLabel::Infinity))
    }

    /// `B_∞ = Σ B_j`.
    pub fn b_infinity(&self) -> Matrix<T> {
        self.residues.iter().skip(1).fold(self.residues[0].clone(), |acc, b| acc.add(b))
    }

    /// `Q(x) = Π (x - p_j)`, monic of degree `S + 2`.
    pub fn q_poly(&self) -> Poly<T> {
        Poly::from_roots(&self.poles)
    }

    /// `Q(x) / (x - p_j)`, computed as the product over the other poles.
    pub fn q_without(&self, j: usize) -> Poly<T> {
        let others: Vec<T> =
            self.poles.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, p)| p.clone()).collect();
        Poly::from_roots(&others)
    }

    /// `Q'(p_j) = Π_{k≠j} (p_j - p_k)`.
    pub fn q_prime_at_pole(&self, j: usize) -> T {
        self.poles
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .fold(T::one(), |acc, (_, p)| acc * &(self.poles[j].clone() - p))
    }

    /// The matrix polynomial `Q(x)·B(x) = Σ (Q/(x-p_j)) B_j` of degree `≤ S+1`.
    pub fn q_times_b(&self) -> MatPoly<T> {
        let n = self.dim();
        (0..self.poles.len()).fold(MatPoly::zero(n, n), |acc, j| {
            acc.add(&MatPoly::constant(self.residues[j].clone()).mul_scalar_poly(&self.q_without(j)))
        })
    }

    /// Same poles, residues `B_j + c·I`.
    pub fn shifted(&self, c: &T) -> Self {
        Self { poles: self.poles.clone(), residues: self.residues.iter().map(|b| b.shift(c)).collect() }
    }

    pub fn to_c64(&self) -> FuchsianSystem<C64> {
        FuchsianSystem {
            poles: self.poles.iter().map(Scalar::to_c64).collect(),
            residues: self.residues.iter().map(Matrix::to_c64).collect(),
        }
    }

    /// Smallest distance between two distinct poles.
    pub fn min_pole_gap(&self) -> f64 {
        let p: Vec<C64> = self.poles.iter().map(Scalar::to_c64).collect();
        let mut gap = f64::INFINITY;
        for a in 0..p.len() {
            for b in a + 1..p.len() {
                gap = gap.min((p[a] - p[b]).norm());
            }
        }
        gap
    }
}

/// `f` with `u' = A(x) u + f(x, u) / Q(x)`; `nonlinearity[m]` is the
/// coefficient of `u^m`, a vector polynomial in `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearSystem<T> {
    linear: FuchsianSystem<T>,
    nonlinearity: BTreeMap<MultiIndex, VecPoly<T>>,
}

impl<T: Scalar> NonlinearSystem<T> {
    pub fn new(linear: FuchsianSystem<T>, nonlinearity: BTreeMap<MultiIndex, VecPoly<T>>) -> Result<Self> {
        let d = linear.dim();
        for (m, coeff) in &nonlinearity {
            if m.dim() != d {
                return Err(Error::Invalid(format!("multi-index {m} has length {} but d = {d}", m.dim())));
            }
            if m.order() < 2 {
                return Err(Error::Invalid(format!("multi-index {m} has order below 2")));
            }
            if coeff.dim() != d {
                return Err(Error::Shape(format!("coefficient of u^{m} has dimension {}", coeff.dim())));
            }
        }
        let nonlinearity = nonlinearity.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(Self { linear, nonlinearity })
    }

    pub fn linear(&self) -> &FuchsianSystem<T> {
        &self.linear
    }

    pub fn nonlinearity(&self) -> &BTreeMap<MultiIndex, VecPoly<T>> {
        &self.nonlinearity
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    /// Highest order `|m|` present in `f` (0 when `f ≡ 0`).
    pub fn max_order(&self) -> usize {
        self.nonlinearity.keys().map(MultiIndex::order).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearViolation {
    pub residue: ResidueLabel,
    pub k: usize,
    pub eigenvalue: C64,
}

/// Outcome of the invertibility check of `k + B_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearCheckReport {
    pub passed: bool,
    /// Largest `k` examined; beyond it `k + B_j` is invertible because `k`
    /// exceeds every spectral radius.
    pub k_bound: usize,
    pub violations: Vec<LinearViolation>,
}

/// Checks that `k + B_j` is invertible for every `k ∈ ℕ` and every residue,
/// including `B_∞`.
pub fn check_linear_assumption<T: Scalar>(
    sys: &FuchsianSystem<T>,
    k_max: usize,
    tol: f64,
) -> Result<LinearCheckReport> {
    let mut spectra = Vec::new();
    let mut radius: f64 = 0.0;
    for label in sys.labels() {
        let ev = mat_eigenvalues(&sys.residue(label), tol)?;
        radius = ev.iter().map(|z| z.norm()).fold(radius, f64::max);
        spectra.push((label, ev));
    }
    let k_bound = k_max.max(ceil_nonneg(radius + tol));
    let mut violations = Vec::new();
    for (label, ev) in &spectra {
        for lambda in ev {
            for k in 0..=k_bound {
                if (lambda + k as f64).norm() <= tol {
                    violations.push(LinearViolation { residue: *label, k, eigenvalue: *lambda });
                }
            }
        }
    }
    Ok(LinearCheckReport { passed: violations.is_empty(), k_bound, violations })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearViolation {
    pub residue: ResidueLabel,
    pub k: usize,
    pub m: MultiIndex,
    pub i: usize,
    pub value: C64,
}

/// Outcome of the nonlinear nonresonance scan.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearCheckReport {
    pub passed: bool,
    pub order_max: usize,
    pub violations: Vec<NonlinearViolation>,
}

/// Scans `k + λ·m - λ_i` for `2 ≤ |m| ≤ order_max` and every `A_j`,
/// including `A_∞`. For each `m`, `k` runs up to
/// `ceil((|m|+1)·max|λ|) + 1`, past which the expression cannot vanish.
pub fn check_nonlinear_assumption<T: Scalar>(
    nsys: &NonlinearSystem<T>,
    order_max: usize,
    tol: f64,
) -> Result<NonlinearCheckReport> {
    let sys = nsys.linear();
    let d = sys.dim();
    let mut violations = Vec::new();
    for label in sys.labels() {
        let lambda = mat_eigenvalues(&sys.residue(label), tol)?;
        let max_abs = lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for n in 2..=order_max {
            let k_bound = ceil_nonneg((n as f64 + 1.0) * max_abs) + 1;
            for m in MultiIndex::all_of_order(d, n) {
                let dot = m.dot(&lambda);
                for (i, li) in lambda.iter().enumerate() {
                    for k in 0..=k_bound {
                        let value = dot - li + k as f64;
                        if value.norm() <= tol {
                            violations.push(NonlinearViolation { residue: label, k, m: m.clone(), i, value });
                        }
                    }
                }
            }
        }
    }
    Ok(NonlinearCheckReport { passed: violations.is_empty(), order_max, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::CRational;

    fn scalar_system(b: [(i64, i64); 2]) -> FuchsianSystem<CRational> {
        FuchsianSystem::new(
            vec![CRational::from_i64(-1), CRational::from_i64(1)],
            b.iter().map(|&(n, d)| Matrix::scalar(1, CRational::from_ratio(n, d))).collect(),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn b_infinity_sums_residues() {
        let sys = FuchsianSystem::new(
            vec![C64::new(0.0, 0.0), C64::new(1.0, 2.0)],
            vec![Matrix::identity(2), Matrix::identity(2)],
            1e-12,
        )
        .unwrap();
        assert_eq!(sys.b_infinity(), Matrix::scalar(2, C64::new(2.0, 0.0)));
        assert_eq!(scalar_system([(1, 1), (1, 1)]).b_infinity()[(0, 0)], CRational::from_i64(2));
        assert_eq!(scalar_system([(-1, 4), (-1, 4)]).b_infinity()[(0, 0)], CRational::from_ratio(-1, 2));
    }

    #[test]
    fn rejects_coincident_poles_and_bad_shapes() {
        let r = FuchsianSystem::new(
            vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
            vec![Matrix::identity(1), Matrix::identity(1)],
            1e-12,
        );
        assert!(matches!(r, Err(Error::Invalid(_))));
        let r = FuchsianSystem::new(
            vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)],
            vec![Matrix::identity(1), Matrix::identity(2)],
            1e-12,
        );
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn q_times_b_assembles_exact_polynomial() {
        let sys = scalar_system([(1, 1), (1, 1)]);
        // (x - 1) + (x + 1) = 2x
        let qb = sys.q_times_b();
        assert_eq!(qb.degree(), Some(1));
        assert_eq!(qb.coeff(1)[(0, 0)], CRational::from_i64(2));
        assert!(qb.coeff(0)[(0, 0)].is_exact_zero());
        assert_eq!(sys.q_prime_at_pole(0), CRational::from_i64(-2));
    }

    #[test]
    fn linear_check_examples() {
        let report = check_linear_assumption(&scalar_system([(1, 1), (1, 1)]), 4, RESONANCE_TOL).unwrap();
        assert!(report.passed);
        let report = check_linear_assumption(&scalar_system([(-1, 2), (-1, 2)]), 4, RESONANCE_TOL).unwrap();
        assert!(!report.passed);
        assert!(report.violations.iter().any(|v| v.residue == ResidueLabel::Infinity && v.k == 1));
        let report = check_linear_assumption(&scalar_system([(0, 1), (1, 1)]), 4, RESONANCE_TOL).unwrap();
        assert!(report.violations.iter().any(|v| v.residue == ResidueLabel::Pole(0) && v.k == 0));
    }

    #[test]
    fn linear_check_extends_bound_past_spectral_radius() {
        let report = check_linear_assumption(&scalar_system([(-7, 1), (3, 1)]), 1, RESONANCE_TOL).unwrap();
        assert!(report.k_bound >= 7);
        assert!(report.violations.iter().any(|v| v.residue == ResidueLabel::Pole(0) && v.k == 7));
    }

    fn nonlinear(a: [(i64, i64); 2]) -> NonlinearSystem<CRational> {
        NonlinearSystem::new(scalar_system(a), BTreeMap::new()).unwrap()
    }

    #[test]
    fn nonlinear_check_examples() {
        assert!(check_nonlinear_assumption(&nonlinear([(1, 1), (1, 1)]), 6, RESONANCE_TOL).unwrap().passed);
        // λ = -1 at A_0: k + (n - 1)(-1) vanishes at k = n - 1.
        let report = check_nonlinear_assumption(&nonlinear([(-1, 1), (3, 1)]), 4, RESONANCE_TOL).unwrap();
        assert!(!report.passed);
        assert!(report
            .violations
            .iter()
            .any(|v| v.residue == ResidueLabel::Pole(0) && v.m.order() == 2 && v.k == 1));
    }

    #[test]
    fn nonlinear_check_flags_exact_resonance() {
        let a0 = Matrix::from_diagonal(&[CRational::from_i64(2), CRational::from_i64(1)]);
        let a1 = Matrix::from_diagonal(&[CRational::from_ratio(1, 3), CRational::from_ratio(2, 7)]);
        let sys = FuchsianSystem::new(vec![CRational::from_i64(-1), CRational::from_i64(1)], vec![a0, a1], 0.0)
            .unwrap();
        let nsys = NonlinearSystem::new(sys, BTreeMap::new()).unwrap();
        let report = check_nonlinear_assumption(&nsys, 2, RESONANCE_TOL).unwrap();
        assert!(report.violations.iter().any(|v| v.residue == ResidueLabel::Pole(0)
            && v.k == 0
            && v.m == MultiIndex::new(vec![0, 2])
            && v.i == 0));
    }

    #[test]
    fn nonlinear_system_rejects_low_order_terms() {
        let mut f = BTreeMap::new();
        f.insert(MultiIndex::new(vec![1]), VecPoly::constant(vec![CRational::one()]));
        assert!(NonlinearSystem::new(scalar_system([(1, 1), (1, 1)]), f).is_err());
    }
}
