//! Matrix-valued generalized Jacobi–Angelesco polynomials.
//!
//! For a Fuchsian matrix `B(x)` with `S + 2` poles the family is
//! `P_n = 𝒜_1 𝒜_2 ⋯ 𝒜_m x^i` with `n = (S+1)m + i`, `0 ≤ i ≤ S`, and
//! `𝒜_k = k Q' + Q B + Q ∂_x`. This is the Rodrigues construction
//! `W⁻¹ (d/dx)^m [x^i Q^m W]` with the integrating factor eliminated, so the
//! family is computed without ever forming `W`.
//!
//! Normalization is the Rodrigues one: no monic rescaling. The coefficient
//! of `x^n` in `P_n` is `C_n = Π_{j=1}^m (j + n + B_∞)`.

use crate::error::{Error, Result};
use crate::fuchsian::FuchsianSystem;
use crate::matrix::{solve_linear, vector, Matrix};
use crate::poly::{MatPoly, Poly, VecPoly};
use crate::scalar::Scalar;

/// `n = (S+1)·m + i` split used by the operator product.
pub fn split_index(n: usize, s: usize) -> (usize, usize) {
    (n / (s + 1), n % (s + 1))
}

/// `𝒜_k p = k Q' p + (Q B) p + Q p'`.
pub fn op_ak<T: Scalar>(sys: &FuchsianSystem<T>, k: usize, p: &MatPoly<T>) -> MatPoly<T> {
    OperatorData::new(sys).apply(k, p)
}

#[derive(Clone)]
struct OperatorData<T> {
    q: Poly<T>,
    q_prime: Poly<T>,
    qb: MatPoly<T>,
}

impl<T: Scalar> OperatorData<T> {
    fn new(sys: &FuchsianSystem<T>) -> Self {
        let q = sys.q_poly();
        Self { q_prime: q.derivative(), q, qb: sys.q_times_b() }
    }

    fn apply(&self, k: usize, p: &MatPoly<T>) -> MatPoly<T> {
        let kq = self.q_prime.scale(&T::from_i64(k as i64));
        p.mul_scalar_poly(&kq).add(&self.qb.mul(p)).add(&p.derivative().mul_scalar_poly(&self.q))
    }
}

/// Leading coefficient `C_n` together with its invertibility flag.
#[derive(Clone, Debug, PartialEq)]
pub struct LeadingCoefficient<T> {
    pub matrix: Matrix<T>,
    /// `false` when some factor `j + n + B_∞` is singular to tolerance, so
    /// that `deg P_n < n`.
    pub invertible: bool,
}

/// Lazily extended family `P_0, P_1, …` attached to one Fuchsian system.
///
/// The cache is filled through `&mut self`; share a family across threads
/// only behind external synchronization, or build one per thread.
#[derive(Clone)]
pub struct RodriguesFamily<T> {
    system: FuchsianSystem<T>,
    ops: OperatorData<T>,
    cache: Vec<MatPoly<T>>,
}

impl<T: Scalar> RodriguesFamily<T> {
    pub fn new(system: FuchsianSystem<T>) -> Self {
        let ops = OperatorData::new(&system);
        Self { system, ops, cache: Vec::new() }
    }

    pub fn system(&self) -> &FuchsianSystem<T> {
        &self.system
    }

    fn compute(&self, n: usize) -> MatPoly<T> {
        let s = self.system.s();
        let size = self.system.dim();
        let (m, i) = split_index(n, s);
        let mut p = MatPoly::monomial(i, Matrix::identity(size));
        for k in (1..=m).rev() {
            p = self.ops.apply(k, &p);
        }
        p
    }

    /// `P_n`, computing and caching `P_0..P_n` as needed.
    pub fn p_n(&mut self, n: usize) -> &MatPoly<T> {
        while self.cache.len() <= n {
            let next = self.compute(self.cache.len());
            self.cache.push(next);
        }
        &self.cache[n]
    }

    /// `C_n = Π_{j=1}^m (j + n + B_∞)`; the empty product `I` for `n ≤ S`.
    pub fn leading_coeff(&self, n: usize, tol: f64) -> LeadingCoefficient<T> {
        let (m, _) = split_index(n, self.system.s());
        let b_inf = self.system.b_infinity();
        let size = b_inf.rows();
        let mut invertible = true;
        let mut c = Matrix::identity(size);
        for j in 1..=m {
            let factor = b_inf.shift(&T::from_i64((j + n) as i64));
            if factor.inverse(tol).is_err() {
                invertible = false;
            }
            c = c.mul(&factor);
        }
        LeadingCoefficient { matrix: c, invertible }
    }

    /// Unique coefficients `g_n` with `g = Σ_{n ≤ deg g} P_n g_n`, by
    /// descending back-substitution on the leading coefficients.
    pub fn expand(&mut self, g: &VecPoly<T>, tol: f64) -> Result<Vec<Vec<T>>> {
        let size = self.system.dim();
        if g.dim() != size {
            return Err(Error::Shape(format!("expansion of a {}-vector in a family of size {size}", g.dim())));
        }
        let g = g.trimmed(tol);
        let Some(deg) = g.degree() else {
            return Ok(Vec::new());
        };
        self.p_n(deg);
        let mut rem: Vec<Vec<T>> = (0..=deg).map(|k| g.coeff(k)).collect();
        let mut out = vec![vector::zeros(size); deg + 1];
        for n in (0..=deg).rev() {
            let p = &self.cache[n];
            let lead = p.coeff(n);
            let coeff = solve_linear(&lead, &rem[n], tol).map_err(|_| {
                Error::Assumption(format!(
                    "leading coefficient of P_{n} is singular (k + B_inf not invertible for some k >= {})",
                    self.system.s() + 2
                ))
            })?;
            for (k, pk) in p.coeffs().iter().enumerate().take(n + 1) {
                rem[k] = vector::sub(&rem[k], &pk.mul_vec(&coeff));
            }
            rem[n] = vector::zeros(size);
            out[n] = coeff;
        }
        Ok(out)
    }

    /// `Σ P_n g_n`.
    pub fn synthesize(&mut self, coeffs: &[Vec<T>]) -> VecPoly<T> {
        let size = self.system.dim();
        let mut acc = VecPoly::zero(size);
        for (n, c) in coeffs.iter().enumerate() {
            if vector::is_zero_tol(c, 0.0) {
                continue;
            }
            let term = self.p_n(n).mul_vec(&VecPoly::constant(c.clone()));
            acc = acc.add(&term);
        }
        acc
    }
}

/// Same poles with residues `B_j - I`; its family is the shifted family
/// `P̃̃_n` (`B̃̃_∞ = B_∞ - (S+2) I`).
pub fn shifted_family<T: Scalar>(sys: &FuchsianSystem<T>) -> FuchsianSystem<T> {
    sys.shifted(&-T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::CRational;

    fn q(n: i64, d: i64) -> CRational {
        CRational::from_ratio(n, d)
    }

    fn scalar_system(poles: &[CRational], b: &[CRational]) -> FuchsianSystem<CRational> {
        FuchsianSystem::new(poles.to_vec(), b.iter().map(|v| Matrix::scalar(1, v.clone())).collect(), 0.0)
            .unwrap()
    }

    fn jacobi_like() -> FuchsianSystem<CRational> {
        scalar_system(&[q(-1, 1), q(1, 1)], &[q(1, 1), q(1, 1)])
    }

    fn scalar_poly(p: &MatPoly<CRational>) -> Vec<CRational> {
        p.coeffs().iter().map(|m| m[(0, 0)].clone()).collect()
    }

    #[test]
    fn op_ak_examples() {
        let sys = jacobi_like();
        let one = MatPoly::constant(Matrix::identity(1));
        assert_eq!(scalar_poly(&op_ak(&sys, 1, &one)), vec![q(0, 1), q(4, 1)]);
        assert_eq!(scalar_poly(&op_ak(&sys, 2, &one)), vec![q(0, 1), q(6, 1)]);
        assert!(op_ak(&sys, 3, &MatPoly::zero(1, 1)).is_zero());
    }

    #[test]
    fn p_n_examples() {
        let mut fam = RodriguesFamily::new(jacobi_like());
        assert_eq!(fam.p_n(0), &MatPoly::constant(Matrix::identity(1)));
        assert_eq!(scalar_poly(fam.p_n(1)), vec![q(0, 1), q(4, 1)]);
        assert_eq!(scalar_poly(fam.p_n(2)), vec![q(-6, 1), q(0, 1), q(30, 1)]);
    }

    #[test]
    fn leading_coeff_examples() {
        let fam = RodriguesFamily::new(jacobi_like());
        assert_eq!(fam.leading_coeff(1, 0.0).matrix[(0, 0)], q(4, 1));
        assert_eq!(fam.leading_coeff(2, 0.0).matrix[(0, 0)], q(30, 1));
        // B_∞ = -(n+1) forces the j = 1 factor to vanish.
        let sys = scalar_system(&[q(-1, 1), q(1, 1)], &[q(-3, 2), q(-3, 2)]);
        let fam = RodriguesFamily::new(sys);
        let lc = fam.leading_coeff(2, 0.0);
        assert!(!lc.invertible);
        assert!(lc.matrix[(0, 0)].is_exact_zero());
    }

    #[test]
    fn expansion_examples() {
        let mut fam = RodriguesFamily::new(jacobi_like());
        assert!(fam.expand(&VecPoly::zero(1), 0.0).unwrap().is_empty());
        let x = VecPoly::monomial(1, vec![q(1, 1)]);
        assert_eq!(fam.expand(&x, 0.0).unwrap(), vec![vec![q(0, 1)], vec![q(1, 4)]]);
        let x2 = VecPoly::monomial(2, vec![q(1, 1)]);
        assert_eq!(fam.expand(&x2, 0.0).unwrap(), vec![vec![q(1, 5)], vec![q(0, 1)], vec![q(1, 30)]]);
    }

    #[test]
    fn expansion_fails_on_singular_leading_coefficient() {
        let sys = scalar_system(&[q(-1, 1), q(1, 1)], &[q(-3, 2), q(-3, 2)]);
        let mut fam = RodriguesFamily::new(sys);
        let x2 = VecPoly::monomial(2, vec![q(1, 1)]);
        assert!(matches!(fam.expand(&x2, 0.0), Err(Error::Assumption(_))));
    }

    #[test]
    fn shifted_family_examples() {
        let tt = shifted_family(&jacobi_like());
        assert!(tt.residues().iter().all(|b| b[(0, 0)].is_exact_zero()));
        let s = tt.s() as i64;
        assert_eq!(
            tt.b_infinity()[(0, 0)],
            jacobi_like().b_infinity()[(0, 0)].clone() - q(s + 2, 1)
        );
        let mut fam = RodriguesFamily::new(tt.clone());
        assert_eq!(scalar_poly(fam.p_n(1)), vec![q(0, 1), q(2, 1)]);
        assert_eq!(scalar_poly(fam.p_n(2)), vec![q(-4, 1), q(0, 1), q(12, 1)]);
        let twice = shifted_family(&tt);
        assert_eq!(twice.residues()[0][(0, 0)], q(-1, 1));
    }

    /// Generalized binomial coefficient `C(b, k)` for rational `b`.
    fn gen_binom(b: &CRational, k: usize) -> CRational {
        let mut c = CRational::one();
        for j in 0..k {
            c = c * &(b.clone() - q(j as i64, 1)) / q(j as i64 + 1, 1);
        }
        c
    }

    fn series_mul(a: &[CRational], b: &[CRational], len: usize) -> Vec<CRational> {
        let mut out = vec![CRational::zero(); len];
        for (i, x) in a.iter().enumerate().take(len) {
            for (j, y) in b.iter().enumerate().take(len - i) {
                out[i + j] = out[i + j].clone() + x.clone() * y;
            }
        }
        out
    }

    /// Rodrigues derivative `W⁻¹ (d/dx)^m [x^i Q^m W]` at a regular point
    /// `x0`, with `W = Π (x - p_j)^{b_j}` expanded by binomial series in
    /// `t = x - x0`.
    fn rodrigues_oracle(poles: &[CRational], b: &[CRational], n: usize, x0: &CRational) -> CRational {
        let s = poles.len() - 2;
        let (m, i) = split_index(n, s);
        let len = m + 1;
        let mut series = vec![CRational::zero(); len];
        series[0] = CRational::one();
        // x^i
        for _ in 0..i {
            series = series_mul(&series, &[x0.clone(), CRational::one()], len);
        }
        for (p, bj) in poles.iter().zip(b) {
            let c = x0.clone() - p;
            for _ in 0..m {
                series = series_mul(&series, &[c.clone(), CRational::one()], len);
            }
            // (x - p)^{b} / (x0 - p)^{b} = (1 + t/c)^b
            let mut binom = Vec::with_capacity(len);
            let mut cpow = CRational::one();
            for k in 0..len {
                binom.push(gen_binom(bj, k) / cpow.clone());
                cpow *= &c;
            }
            series = series_mul(&series, &binom, len);
        }
        let factorial: i64 = (1..=m as i64).product();
        series[m].clone() * &q(factorial, 1)
    }

    #[test]
    fn operator_product_matches_rodrigues_derivative() {
        let cases: Vec<(Vec<CRational>, Vec<CRational>)> = vec![
            (vec![q(-1, 1), q(1, 1)], vec![q(1, 1), q(1, 1)]),
            (vec![q(-1, 1), q(1, 1)], vec![q(1, 3), q(-2, 5)]),
            (vec![q(0, 1), q(1, 1), q(3, 1)], vec![q(1, 2), q(2, 3), q(-1, 4)]),
            (vec![q(-2, 1), q(0, 1), q(1, 2), q(2, 1)], vec![q(3, 4), q(1, 5), q(5, 3), q(1, 7)]),
        ];
        let samples = [q(7, 3), q(-11, 5), q(13, 2), q(5, 7), q(-3, 1), q(17, 4), q(9, 1), q(-29, 3)];
        for (poles, b) in cases {
            let sys = scalar_system(&poles, &b);
            let mut fam = RodriguesFamily::new(sys);
            for n in 0..=6 {
                let p = fam.p_n(n).clone();
                for x0 in &samples {
                    assert_eq!(p.eval(x0)[(0, 0)], rodrigues_oracle(&poles, &b, n, x0), "n = {n}");
                }
            }
        }
    }

    #[test]
    fn two_pole_scalar_case_is_scaled_jacobi() {
        // P_n = 2^n n! P_n^{(α, β)} with α = b_1 (at +1), β = b_0 (at -1).
        let (b0, b1) = (q(2, 3), q(-1, 4));
        let mut fam = RodriguesFamily::new(scalar_system(&[q(-1, 1), q(1, 1)], &[b0.clone(), b1.clone()]));
        for n in 0..=6usize {
            let mut jacobi = Poly::zero();
            for s in 0..=n {
                let c = gen_binom(&(b1.clone() + q(n as i64, 1)), n - s) * &gen_binom(&(b0.clone() + q(n as i64, 1)), s);
                let xm = Poly::new(vec![q(-1, 2), q(1, 2)]);
                let xp = Poly::new(vec![q(1, 2), q(1, 2)]);
                let mut term = Poly::constant(c);
                for _ in 0..s {
                    term = term.mul(&xm);
                }
                for _ in 0..n - s {
                    term = term.mul(&xp);
                }
                jacobi = jacobi.add(&term);
            }
            let scale = q(2i64.pow(n as u32) * (1..=n as i64).product::<i64>(), 1);
            let expected = jacobi.scale(&scale);
            let got = Poly::new(scalar_poly(fam.p_n(n)));
            assert_eq!(got, expected, "n = {n}");
        }
    }

    #[test]
    fn expansion_resynthesizes_matrix_family() {
        let b0 = Matrix::from_rows(vec![vec![q(1, 2), q(1, 1)], vec![q(0, 1), q(3, 2)]]).unwrap();
        let b1 = Matrix::from_rows(vec![vec![q(2, 1), q(0, 1)], vec![q(-1, 3), q(5, 4)]]).unwrap();
        let sys = FuchsianSystem::new(vec![q(-1, 1), q(2, 1)], vec![b0, b1], 0.0).unwrap();
        let mut fam = RodriguesFamily::new(sys);
        let g = VecPoly::new(
            2,
            (0..=8).map(|k| vec![q(k as i64 - 3, 1), q(1, k as i64 + 1)]).collect(),
        )
        .unwrap();
        let coeffs = fam.expand(&g, 0.0).unwrap();
        assert_eq!(fam.synthesize(&coeffs), g);
        for n in 0..=8 {
            let p = fam.p_n(n).clone();
            assert_eq!(p.degree(), Some(n));
            assert_eq!(p.coeff(n), fam.leading_coeff(n, 0.0).matrix);
        }
    }
}
