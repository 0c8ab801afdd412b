//! Formal linearization and normal forms of `u' = A(x) u + f(x, u) / Q(x)`.
//!
//! The substitution `u = w + h(x, w)` is solved order by order in `w`. At
//! order `n` the unknown `h_n` satisfies a Fuchsian block system with
//! residues `J_{A_j}`, and the correction of that block is the order-`n`
//! part of the obstruction `φ` (linearization mode) or of the normal form
//! `ψ` (normal-form mode). The two modes differ only in what is composed
//! into the block right-hand side:
//!
//! * obstruction: `[f(x, w+h) - φ(x, w+h)]_n`
//! * normal form: `[f(x, w+h) - ψ(x, w) - d_w h · ψ(x, w)]_n`

use std::collections::BTreeMap;

use crate::correction::{residual, PolynomialSolver};
use crate::error::{Error, Result};
use crate::fuchsian::{check_nonlinear_assumption, FuchsianSystem, NonlinearSystem, RESONANCE_TOL};
use crate::matching::spectrum_mismatch;
use crate::matrix::mat_eigenvalues;
use crate::pn_space::{basis, devectorize, jm_matrix, jm_spectrum_predicted, vectorize, HomogeneousTerm, MultiIndex, PnBasis};
use crate::poly::{Poly, VecPoly};
use crate::scalar::Scalar;
use crate::wseries::{components, homogeneous_table, substitute, WSeries};

/// Which conjugacy is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Linearization of the corrected system; the correction is `φ`.
    Obstruction,
    /// Conjugacy to `w' = A w + ψ / Q`; the correction is `ψ`.
    NormalForm,
}

/// Order in which basis elements and nonlinearity terms are enumerated.
/// Results are independent of it; it exists to test exactly that.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Enumeration {
    #[default]
    Canonical,
    Reversed,
    Rotated(usize),
}

impl Enumeration {
    fn order(self, len: usize) -> Vec<usize> {
        match self {
            Enumeration::Canonical => (0..len).collect(),
            Enumeration::Reversed => (0..len).rev().collect(),
            Enumeration::Rotated(k) => (0..len).map(|i| (i + k) % len.max(1)).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LinearizeOptions {
    pub tol: f64,
    /// Threshold of the nonresonance gate.
    pub resonance_tol: f64,
    pub enumeration: Enumeration,
}

impl Default for LinearizeOptions {
    fn default() -> Self {
        Self { tol: 1e-12, resonance_tol: RESONANCE_TOL, enumeration: Enumeration::Canonical }
    }
}

/// Series `Σ_{2≤|m|≤order} q_m(x) w^m` with vector polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTable<T> {
    pub d: usize,
    pub order: usize,
    pub terms: BTreeMap<MultiIndex, VecPoly<T>>,
}

impl<T: Scalar> SeriesTable<T> {
    pub fn new(d: usize, order: usize) -> Self {
        Self { d, order, terms: BTreeMap::new() }
    }

    pub fn get(&self, m: &MultiIndex) -> Option<&VecPoly<T>> {
        self.terms.get(m)
    }

    pub fn insert_homogeneous(&mut self, term: HomogeneousTerm<T>) {
        self.terms.extend(term.into_iter().filter(|(_, p)| !p.is_zero()));
    }

    pub fn homogeneous(&self, n: usize) -> HomogeneousTerm<T> {
        self.terms.iter().filter(|(m, _)| m.order() == n).map(|(m, p)| (m.clone(), p.clone())).collect()
    }

    /// Largest `x`-degree over all coefficients.
    pub fn max_degree(&self) -> Option<usize> {
        self.terms.values().filter_map(VecPoly::degree).max()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

fn negate<T: Scalar>(s: &WSeries<T>) -> WSeries<T> {
    s.scale_poly(&Poly::constant(-T::one()))
}

/// Degree-`n` part of the composed right-hand side for `mode`, from `h` and
/// the correction table `extra` (orders present in the tables are used as
/// given; pass tables truncated below `n` during the recursion).
pub fn compose_series<T: Scalar>(
    f: &BTreeMap<MultiIndex, VecPoly<T>>,
    h: &SeriesTable<T>,
    extra: Option<&SeriesTable<T>>,
    mode: Mode,
    n: usize,
) -> Result<HomogeneousTerm<T>> {
    compose_in_order(f, h, extra, mode, n, Enumeration::Canonical)
}

fn compose_in_order<T: Scalar>(
    f: &BTreeMap<MultiIndex, VecPoly<T>>,
    h: &SeriesTable<T>,
    extra: Option<&SeriesTable<T>>,
    mode: Mode,
    n: usize,
    enumeration: Enumeration,
) -> Result<HomogeneousTerm<T>> {
    let d = h.d;
    let bad = |m: &MultiIndex, p: &VecPoly<T>| m.dim() != d || p.dim() != d;
    if f.iter().any(|(m, p)| bad(m, p))
        || h.terms.iter().any(|(m, p)| bad(m, p))
        || extra.is_some_and(|e| e.d != d || e.terms.iter().any(|(m, p)| bad(m, p)))
    {
        return Err(Error::Shape(format!("series tables must all have dimension {d}")));
    }
    let hs = components(&h.terms, d, n);
    let u: Vec<WSeries<T>> = (0..d).map(|k| WSeries::coordinate(d, k, n).add(&hs[k])).collect();
    let entries: Vec<(&MultiIndex, &VecPoly<T>)> = f.iter().collect();
    let ordered = enumeration.order(entries.len()).into_iter().map(|k| entries[k]);
    let mut out = substitute(ordered, &u, n);
    if let Some(extra) = extra {
        let correction = match mode {
            Mode::Obstruction => substitute(&extra.terms, &u, n),
            Mode::NormalForm => {
                let psi = components(&extra.terms, d, n);
                (0..d)
                    .map(|i| {
                        let mut acc = psi[i].clone();
                        for (k, psi_k) in psi.iter().enumerate() {
                            acc = acc.add(&hs[i].partial(k).mul(psi_k));
                        }
                        acc
                    })
                    .collect()
            }
        };
        for (o, c) in out.iter_mut().zip(&correction) {
            *o = o.add(&negate(c));
        }
    }
    Ok(homogeneous_table(&out, n))
}

/// Eigenvalue check of one block against `{λ·m - λ_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockReport {
    pub n: usize,
    pub size: usize,
    /// Largest mismatch over all residues after optimal pairing.
    pub spectrum_mismatch: f64,
}

/// Correction (`φ` or `ψ`), conjugating map `h`, and block diagnostics.
#[derive(Clone, Debug)]
pub struct Normalization<T> {
    pub mode: Mode,
    pub correction: SeriesTable<T>,
    pub h: SeriesTable<T>,
    pub blocks: Vec<BlockReport>,
}

fn block_system<T: Scalar>(lin: &FuchsianSystem<T>, basis: &PnBasis) -> Result<FuchsianSystem<T>> {
    let residues = lin.residues().iter().map(|a| jm_matrix(a, basis)).collect::<Result<Vec<_>>>()?;
    FuchsianSystem::new(lin.poles().to_vec(), residues, 0.0)
}

fn block_spectrum_mismatch<T: Scalar>(lin: &FuchsianSystem<T>, block: &FuchsianSystem<T>, n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let pairs = lin.residues().iter().zip(block.residues()).map(|(a, b)| (a.clone(), b.clone()));
    for (a, b) in pairs.chain(std::iter::once((lin.b_infinity(), block.b_infinity()))) {
        let predicted = jm_spectrum_predicted(&a, lin.dim(), n, RESONANCE_TOL)?;
        let actual = mat_eigenvalues(&b, RESONANCE_TOL)?;
        let scale = 1.0 + predicted.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mismatch = spectrum_mismatch(&predicted, &actual).expect("block size matches") / scale;
        worst = worst.max(mismatch);
    }
    Ok(worst)
}

/// Runs the block recursion for orders `2..=order` in the given mode.
pub fn normalize<T: Scalar>(
    nsys: &NonlinearSystem<T>,
    order: usize,
    mode: Mode,
    opts: &LinearizeOptions,
) -> Result<Normalization<T>> {
    let report = check_nonlinear_assumption(nsys, order, opts.resonance_tol)?;
    if !report.passed {
        let v = &report.violations[0];
        return Err(Error::Assumption(format!(
            "nonresonance fails for A_{} at k = {}, m = {}, i = {} ({} violation(s))",
            v.residue,
            v.k,
            v.m,
            v.i,
            report.violations.len()
        )));
    }
    let lin = nsys.linear();
    let d = lin.dim();
    let mut correction = SeriesTable::new(d, order);
    let mut h = SeriesTable::new(d, order);
    let mut blocks = Vec::new();
    for n in 2..=order {
        let canonical = basis(d, n);
        let pn = canonical.permuted(&opts.enumeration.order(canonical.len()))?;
        let block = block_system(lin, &pn)?;
        blocks.push(BlockReport { n, size: pn.len(), spectrum_mismatch: block_spectrum_mismatch(lin, &block, n)? });
        let g_term = compose_in_order(nsys.nonlinearity(), &h, Some(&correction), mode, n, opts.enumeration)?;
        let g = vectorize(&g_term, &pn)?;
        let solved = PolynomialSolver::new(block).solve(&g, opts.tol)?;
        correction.insert_homogeneous(devectorize(&solved.phi, &pn)?);
        h.insert_homogeneous(devectorize(&solved.y, &pn)?);
    }
    Ok(Normalization { mode, correction, h, blocks })
}

/// Obstruction `φ` and linearizing map `h` through `order`.
pub fn linearize<T: Scalar>(nsys: &NonlinearSystem<T>, order: usize, opts: &LinearizeOptions) -> Result<Normalization<T>> {
    normalize(nsys, order, Mode::Obstruction, opts)
}

/// Normal form `ψ` and conjugating map `h` through `order`.
pub fn normal_form<T: Scalar>(nsys: &NonlinearSystem<T>, order: usize, opts: &LinearizeOptions) -> Result<Normalization<T>> {
    normalize(nsys, order, Mode::NormalForm, opts)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderResidual {
    pub n: usize,
    /// Largest coefficient of the cleared residual polynomial.
    pub residual: f64,
    pub exact_zero: bool,
}

/// Order-by-order residual of the conjugacy equation after clearing `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyReport {
    pub orders: Vec<OrderResidual>,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Expands both sides of the conjugacy equation through `order` and
/// reports `Q ∂_x h_n + Q J_A h_n - [right-hand side]_n` per order.
pub fn verify_conjugacy<T: Scalar>(
    nsys: &NonlinearSystem<T>,
    correction: &SeriesTable<T>,
    h: &SeriesTable<T>,
    order: usize,
    mode: Mode,
) -> Result<ConjugacyReport> {
    let lin = nsys.linear();
    let d = lin.dim();
    let scale = 1.0 + nsys.nonlinearity().values().map(VecPoly::max_abs).fold(0.0, f64::max);
    let threshold = if T::EXACT { 0.0 } else { 1e-9 * scale };
    let mut orders = Vec::new();
    for n in 2..=order {
        let pn = basis(d, n);
        let block = block_system(lin, &pn)?;
        let rhs = vectorize(&compose_series(nsys.nonlinearity(), h, Some(correction), mode, n)?, &pn)?;
        let hn = vectorize(&h.homogeneous(n), &pn)?;
        let r = residual(&block, &rhs, &VecPoly::zero(pn.len()), &hn);
        orders.push(OrderResidual { n, residual: r.max_abs(), exact_zero: r.is_zero() });
    }
    let max_residual = orders.iter().map(|o| o.residual).fold(0.0, f64::max);
    let passed = if T::EXACT { orders.iter().all(|o| o.exact_zero) } else { max_residual <= threshold };
    Ok(ConjugacyReport { orders, max_residual, threshold, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::scalar::CRational;

    fn q(n: i64, d: i64) -> CRational {
        CRational::from_ratio(n, d)
    }

    fn scalar_nsys(f: &[(u32, Vec<CRational>)]) -> NonlinearSystem<CRational> {
        let lin = FuchsianSystem::new(
            vec![q(-1, 1), q(1, 1)],
            vec![Matrix::scalar(1, q(1, 1)), Matrix::scalar(1, q(1, 1))],
            0.0,
        )
        .unwrap();
        let table = f
            .iter()
            .map(|(e, c)| {
                (MultiIndex::new(vec![*e]), VecPoly::new(1, c.iter().map(|v| vec![v.clone()]).collect()).unwrap())
            })
            .collect();
        NonlinearSystem::new(lin, table).unwrap()
    }

    fn table1(entries: &[(u32, Vec<CRational>)]) -> SeriesTable<CRational> {
        let mut t = SeriesTable::new(1, 6);
        for (e, c) in entries {
            t.terms.insert(MultiIndex::new(vec![*e]), VecPoly::new(1, c.iter().map(|v| vec![v.clone()]).collect()).unwrap());
        }
        t
    }

    #[test]
    fn compose_examples() {
        let f = scalar_nsys(&[(2, vec![q(1, 1)])]);
        let empty = SeriesTable::new(1, 6);
        let out = compose_series(f.nonlinearity(), &empty, Some(&empty), Mode::Obstruction, 2).unwrap();
        assert_eq!(&out, f.nonlinearity());
        let out = compose_series(f.nonlinearity(), &empty, None, Mode::Obstruction, 3).unwrap();
        assert!(out.is_empty());
        let f = scalar_nsys(&[(2, vec![q(0, 1), q(1, 1)])]);
        let h = table1(&[(2, vec![q(1, 2)])]);
        let out = compose_series(f.nonlinearity(), &h, None, Mode::Obstruction, 3).unwrap();
        let x = VecPoly::new(1, vec![vec![q(0, 1)], vec![q(1, 1)]]).unwrap();
        assert_eq!(out[&MultiIndex::new(vec![3])], x);
    }

    #[test]
    fn zero_nonlinearity_gives_empty_tables() {
        let nsys = scalar_nsys(&[]);
        for mode in [Mode::Obstruction, Mode::NormalForm] {
            let r = normalize(&nsys, 5, mode, &LinearizeOptions::default()).unwrap();
            assert!(r.correction.is_zero() && r.h.is_zero());
        }
    }

    #[test]
    fn pure_square_is_its_own_obstruction() {
        let nsys = scalar_nsys(&[(2, vec![q(1, 1)])]);
        for mode in [Mode::Obstruction, Mode::NormalForm] {
            let r = normalize(&nsys, 6, mode, &LinearizeOptions::default()).unwrap();
            assert_eq!(r.correction, table1(&[(2, vec![q(1, 1)])]));
            assert!(r.h.is_zero());
            let report = verify_conjugacy(&nsys, &r.correction, &r.h, 6, mode).unwrap();
            assert!(report.passed);
        }
    }

    #[test]
    fn x_times_square_is_linearizable_at_order_two() {
        let nsys = scalar_nsys(&[(2, vec![q(0, 1), q(1, 1)])]);
        let r = linearize(&nsys, 6, &LinearizeOptions::default()).unwrap();
        assert!(r.correction.get(&MultiIndex::new(vec![2])).is_none());
        assert_eq!(r.h.get(&MultiIndex::new(vec![2])), Some(&VecPoly::constant(vec![q(1, 2)])));
        assert!(r.correction.max_degree().is_none_or(|deg| deg == 0));
        let report = verify_conjugacy(&nsys, &r.correction, &r.h, 6, Mode::Obstruction).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(r.blocks.iter().all(|b| b.spectrum_mismatch < 1e-8));
    }

    #[test]
    fn corrupted_map_fails_verification() {
        let nsys = scalar_nsys(&[(2, vec![q(0, 1), q(1, 1)])]);
        let r = linearize(&nsys, 4, &LinearizeOptions::default()).unwrap();
        let mut h = r.h.clone();
        let m2 = MultiIndex::new(vec![2]);
        let bumped = h.get(&m2).unwrap().add(&VecPoly::constant(vec![q(1, 1)]));
        h.terms.insert(m2, bumped);
        let report = verify_conjugacy(&nsys, &r.correction, &h, 4, Mode::Obstruction).unwrap();
        assert!(!report.passed);
        assert!(report.orders[0].residual > 0.0);
    }

    #[test]
    fn x_independent_correction_equal_to_f_verifies() {
        let nsys = scalar_nsys(&[(2, vec![q(3, 1)]), (3, vec![q(-1, 2)])]);
        let f = table1(&[(2, vec![q(3, 1)]), (3, vec![q(-1, 2)])]);
        let report = verify_conjugacy(&nsys, &f, &SeriesTable::new(1, 6), 5, Mode::Obstruction).unwrap();
        assert!(report.passed);
    }

    #[test]
    fn enumeration_order_does_not_change_tables() {
        let lin = FuchsianSystem::new(
            vec![q(-1, 1), q(0, 1), q(2, 1)],
            vec![
                Matrix::from_rows(vec![vec![q(1, 2), q(1, 1)], vec![q(0, 1), q(1, 3)]]).unwrap(),
                Matrix::from_rows(vec![vec![q(2, 5), q(0, 1)], vec![q(1, 1), q(3, 7)]]).unwrap(),
                Matrix::from_rows(vec![vec![q(1, 1), q(-1, 2)], vec![q(1, 4), q(1, 1)]]).unwrap(),
            ],
            0.0,
        )
        .unwrap();
        let mut f = BTreeMap::new();
        f.insert(MultiIndex::new(vec![2, 0]), VecPoly::new(2, vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(2, 1)]]).unwrap());
        f.insert(MultiIndex::new(vec![1, 1]), VecPoly::new(2, vec![vec![q(0, 1), q(-1, 1)]]).unwrap());
        f.insert(MultiIndex::new(vec![0, 3]), VecPoly::new(2, vec![vec![q(1, 3), q(1, 1)], vec![q(0, 1), q(0, 1)], vec![q(1, 1), q(0, 1)]]).unwrap());
        let nsys = NonlinearSystem::new(lin, f).unwrap();
        let base = linearize(&nsys, 4, &LinearizeOptions::default()).unwrap();
        for enumeration in [Enumeration::Reversed, Enumeration::Rotated(3)] {
            let opts = LinearizeOptions { enumeration, ..LinearizeOptions::default() };
            let other = linearize(&nsys, 4, &opts).unwrap();
            assert_eq!(other.correction, base.correction);
            assert_eq!(other.h, base.h);
        }
        assert!(base.correction.max_degree().is_none_or(|deg| deg <= 1));
        assert!(verify_conjugacy(&nsys, &base.correction, &base.h, 4, Mode::Obstruction).unwrap().passed);
        let nf = normal_form(&nsys, 4, &LinearizeOptions::default()).unwrap();
        assert!(verify_conjugacy(&nsys, &nf.correction, &nf.h, 4, Mode::NormalForm).unwrap().passed);
        assert_eq!(nf.correction.homogeneous(2), base.correction.homogeneous(2));
    }

    #[test]
    fn normal_form_can_differ_from_obstruction() {
        // f = x u² + u³: order 4 composes 3 φ_3 h_2 w⁴ in one mode and
        // h_2' ψ_3 = 2 h_2 ψ_3 w⁴ in the other.
        let nsys = scalar_nsys(&[(2, vec![q(0, 1), q(1, 1)]), (3, vec![q(1, 1)])]);
        let opts = LinearizeOptions::default();
        let lin = linearize(&nsys, 5, &opts).unwrap();
        let nf = normal_form(&nsys, 5, &opts).unwrap();
        assert_eq!(lin.correction.terms, table1(&[(3, vec![q(1, 1)])]).terms);
        assert_eq!(nf.correction.terms, table1(&[(3, vec![q(1, 1)]), (4, vec![q(1, 2)]), (5, vec![q(1, 4)])]).terms);
        assert_eq!(lin.h, nf.h);
        assert!(verify_conjugacy(&nsys, &lin.correction, &lin.h, 5, Mode::Obstruction).unwrap().passed);
        assert!(verify_conjugacy(&nsys, &nf.correction, &nf.h, 5, Mode::NormalForm).unwrap().passed);
        assert!(!verify_conjugacy(&nsys, &lin.correction, &lin.h, 5, Mode::NormalForm).unwrap().passed);
    }

    #[test]
    fn resonant_linear_part_is_rejected() {
        // Eigenvalues 2 and 1 at p_0: λ_1 = 2 λ_2 resonates with m = (0, 2), i = 1.
        let lin = FuchsianSystem::new(
            vec![q(-1, 1), q(1, 1)],
            vec![Matrix::from_diagonal(&[q(2, 1), q(1, 1)]), Matrix::from_diagonal(&[q(1, 2), q(1, 3)])],
            0.0,
        )
        .unwrap();
        let nsys = NonlinearSystem::new(lin, BTreeMap::new()).unwrap();
        assert!(matches!(linearize(&nsys, 3, &LinearizeOptions::default()), Err(Error::Assumption(_))));
    }
}
