//! Homogeneous vector polynomials of degree `n` in `w ∈ ℂ^d`, the operator
//! `J_M q = (d_w q) M w - M q` on them, and the Fuchsian block systems it
//! induces.
//!
//! The canonical basis `r_{m,i} = w^m e_i` is ordered by component index
//! first and then lexicographically in `m`. With this order `J_M` is upper
//! triangular whenever `M` is.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::fuchsian::{FuchsianSystem, NonlinearSystem};
use crate::matrix::{mat_eigenvalues, Matrix};
use crate::poly::VecPoly;
use crate::scalar::{Scalar, C64};

/// Exponent vector of a monomial `w^m`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zero(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn unit(d: usize, i: usize) -> Self {
        let mut e = vec![0; d];
        e[i] = 1;
        Self(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|m|`.
    pub fn order(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn dot(&self, lambda: &[C64]) -> C64 {
        self.0.iter().zip(lambda).map(|(&e, l)| l * e as f64).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `m - e_j + e_k`, or `None` when `m_j = 0`.
    pub fn transfer(&self, j: usize, k: usize) -> Option<Self> {
        if self.0[j] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[j] -= 1;
        e[k] += 1;
        Some(Self(e))
    }

    /// All multi-indices with `|m| = n`, in ascending lexicographic order.
    pub fn all_of_order(d: usize, n: usize) -> Vec<Self> {
        fn rec(d: usize, n: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == d {
                prefix.push(n);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for first in 0..=n {
                prefix.push(first);
                rec(d, n - first, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if d == 0 {
            if n == 0 {
                out.push(Self(Vec::new()));
            }
            return out;
        }
        rec(d, n as u32, &mut Vec::with_capacity(d), &mut out);
        out
    }

    /// All multi-indices with `lo ≤ |m| ≤ hi`, grouped by order.
    pub fn all_in_range(d: usize, lo: usize, hi: usize) -> Vec<Self> {
        (lo..=hi).flat_map(|n| Self::all_of_order(d, n)).collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Number of basis elements of the degree-`n` space: `d·C(n+d-1, d-1)`.
pub fn pn_dimension(d: usize, n: usize) -> usize {
    if d == 0 {
        return 0;
    }
    let mut binom: usize = 1;
    for k in 1..d {
        binom = binom * (n + k) / k;
    }
    d * binom
}

/// Ordered canonical basis `(m, i)` of the degree-`n` homogeneous space.
#[derive(Clone, Debug, PartialEq)]
pub struct PnBasis {
    d: usize,
    n: usize,
    items: Vec<(MultiIndex, usize)>,
    position: HashMap<(MultiIndex, usize), usize>,
}

impl PnBasis {
    pub fn new(d: usize, n: usize) -> Self {
        let monomials = MultiIndex::all_of_order(d, n);
        let items: Vec<(MultiIndex, usize)> =
            (0..d).flat_map(|i| monomials.iter().map(move |m| (m.clone(), i))).collect();
        let position = items.iter().enumerate().map(|(k, item)| (item.clone(), k)).collect();
        Self { d, n, items, position }
    }

    /// Same elements, reordered so that position `k` holds element `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.items.len()];
        if order.len() != self.items.len() || order.iter().any(|&k| k >= seen.len() || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::Invalid("basis permutation is not a bijection".into()));
        }
        let items: Vec<(MultiIndex, usize)> = order.iter().map(|&k| self.items[k].clone()).collect();
        let position = items.iter().enumerate().map(|(k, item)| (item.clone(), k)).collect();
        Ok(Self { d: self.d, n: self.n, items, position })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[(MultiIndex, usize)] {
        &self.items
    }

    pub fn index_of(&self, m: &MultiIndex, i: usize) -> Option<usize> {
        self.position.get(&(m.clone(), i)).copied()
    }
}

/// Shorthand for [`PnBasis::new`].
pub fn basis(d: usize, n: usize) -> PnBasis {
    PnBasis::new(d, n)
}

/// Matrix of `J_M` in the canonical basis, built entrywise from
/// `(d_w(w^m e_i)) M w = Σ_{j,k} m_j M_{jk} w^{m-e_j+e_k} e_i` and
/// `M (w^m e_i) = w^m Σ_k M_{ki} e_k`.
pub fn jm_matrix<T: Scalar>(m: &Matrix<T>, basis: &PnBasis) -> Result<Matrix<T>> {
    let d = basis.d();
    if m.rows() != d || m.cols() != d {
        return Err(Error::Shape(format!("J_M needs a {d}x{d} matrix, got {}x{}", m.rows(), m.cols())));
    }
    let size = basis.len();
    let mut out: Matrix<T> = Matrix::zeros(size, size);
    for (col, (mi, i)) in basis.items().iter().enumerate() {
        for j in 0..d {
            let mj = mi.exponents()[j];
            if mj == 0 {
                continue;
            }
            let weight = T::from_i64(mj as i64);
            for k in 0..d {
                if m[(j, k)].is_exact_zero() {
                    continue;
                }
                let target = mi.transfer(j, k).expect("m_j > 0");
                let row = basis.index_of(&target, *i).expect("transfer preserves order");
                out[(row, col)] = out[(row, col)].clone() + weight.clone() * &m[(j, k)];
            }
        }
        for k in 0..d {
            if m[(k, *i)].is_exact_zero() {
                continue;
            }
            let row = basis.index_of(mi, k).expect("same monomial");
            out[(row, col)] = out[(row, col)].clone() - &m[(k, *i)];
        }
    }
    Ok(out)
}

/// The multiset `{λ·m - λ_i : |m| = n, i = 1..d}` built from the eigenvalues
/// of `m`.
pub fn jm_spectrum_predicted<T: Scalar>(m: &Matrix<T>, d: usize, n: usize, tol: f64) -> Result<Vec<C64>> {
    if m.rows() != d || m.cols() != d {
        return Err(Error::Shape(format!("expected {d}x{d} matrix")));
    }
    let lambda = mat_eigenvalues(m, tol)?;
    let monomials = MultiIndex::all_of_order(d, n);
    let mut out = Vec::with_capacity(lambda.len() * monomials.len());
    for li in &lambda {
        out.extend(monomials.iter().map(|mi| mi.dot(&lambda) - li));
    }
    Ok(out)
}

/// One block of the homological recursion: the Fuchsian system acting on
/// degree-`n` coefficients of `h`.
#[derive(Clone, Debug)]
pub struct InducedBlock<T> {
    pub system: FuchsianSystem<T>,
    pub basis: PnBasis,
    /// `J_{A_∞}`, equal to the sum of the block residues.
    pub b_infinity: Matrix<T>,
}

/// Residues `J_{A_j}` on the degree-`n` space, with the same poles.
pub fn induced_fuchsian<T: Scalar>(nsys: &NonlinearSystem<T>, n: usize) -> Result<InducedBlock<T>> {
    if n < 2 {
        return Err(Error::Invalid(format!("block order must be at least 2, got {n}")));
    }
    let lin = nsys.linear();
    let b = basis(lin.dim(), n);
    let residues = lin.residues().iter().map(|a| jm_matrix(a, &b)).collect::<Result<Vec<_>>>()?;
    let b_infinity = jm_matrix(&lin.b_infinity(), &b)?;
    let system = FuchsianSystem::new(lin.poles().to_vec(), residues, 0.0)?;
    let sum = system.b_infinity();
    let scale = b_infinity.max_abs().max(1.0);
    if !sum.sub(&b_infinity).is_zero_tol(1e-12 * scale) {
        return Err(Error::Numeric("block residues do not sum to J of A_inf".into()));
    }
    Ok(InducedBlock { system, basis: b, b_infinity })
}

/// Degree-`n` homogeneous term of a series in `w` whose coefficients are
/// vector polynomials in `x`: `Σ_{|m|=n} q_m(x) w^m`.
pub type HomogeneousTerm<T> = BTreeMap<MultiIndex, VecPoly<T>>;

/// Flattens a homogeneous term into an `N`-dimensional vector polynomial
/// whose coordinates follow the basis order.
pub fn vectorize<T: Scalar>(term: &HomogeneousTerm<T>, basis: &PnBasis) -> Result<VecPoly<T>> {
    let size = basis.len();
    let len = term.values().map(|p| p.coeffs().len()).max().unwrap_or(0);
    let mut coeffs = vec![vec![T::zero(); size]; len];
    for (m, p) in term {
        if m.order() != basis.n() || m.dim() != basis.d() || p.dim() != basis.d() {
            return Err(Error::Shape(format!(
                "term w^{m} with dimension {} does not belong to degree {} in d = {}",
                p.dim(),
                basis.n(),
                basis.d()
            )));
        }
        for (k, c) in p.coeffs().iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                let idx = basis.index_of(m, i).expect("validated multi-index");
                coeffs[k][idx] = v.clone();
            }
        }
    }
    VecPoly::new(size, coeffs)
}

/// Inverse of [`vectorize`]; zero coefficients are omitted.
pub fn devectorize<T: Scalar>(v: &VecPoly<T>, basis: &PnBasis) -> Result<HomogeneousTerm<T>> {
    if v.dim() != basis.len() {
        return Err(Error::Shape(format!("vector of dimension {} for basis of size {}", v.dim(), basis.len())));
    }
    let d = basis.d();
    let mut out = HomogeneousTerm::new();
    for m in MultiIndex::all_of_order(d, basis.n()) {
        let coeffs = v
            .coeffs()
            .iter()
            .map(|c| (0..d).map(|i| c[basis.index_of(&m, i).expect("basis member")].clone()).collect())
            .collect();
        let p = VecPoly::new(d, coeffs)?;
        if !p.is_zero() {
            out.insert(m, p);
        }
    }
    Ok(out)
}
