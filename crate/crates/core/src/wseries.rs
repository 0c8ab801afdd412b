//! Truncated power series in `w ∈ ℂ^d` with polynomial-in-`x` coefficients.

use std::collections::BTreeMap;

use crate::pn_space::MultiIndex;
use crate::poly::{Poly, VecPoly};
use crate::scalar::Scalar;

/// Scalar series `Σ c_m(x) w^m`, truncated at a total degree.
#[derive(Clone, Debug, PartialEq)]
pub struct WSeries<T> {
    d: usize,
    max_order: usize,
    terms: BTreeMap<MultiIndex, Poly<T>>,
}

impl<T: Scalar> WSeries<T> {
    pub fn zero(d: usize, max_order: usize) -> Self {
        Self { d, max_order, terms: BTreeMap::new() }
    }

    pub fn one(d: usize, max_order: usize) -> Self {
        let mut s = Self::zero(d, max_order);
        s.terms.insert(MultiIndex::zero(d), Poly::constant(T::one()));
        s
    }

    /// The coordinate `w_k`.
    pub fn coordinate(d: usize, k: usize, max_order: usize) -> Self {
        let mut s = Self::zero(d, max_order);
        if max_order >= 1 {
            s.terms.insert(MultiIndex::unit(d, k), Poly::constant(T::one()));
        }
        s
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Poly<T>> {
        &self.terms
    }

    pub fn add_term(&mut self, m: MultiIndex, c: &Poly<T>) {
        if m.order() > self.max_order || c.is_zero() {
            return;
        }
        let sum = self.terms.get(&m).map_or_else(|| c.clone(), |p| p.add(c));
        if sum.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, sum);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn scale_poly(&self, p: &Poly<T>) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), c.mul(p)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Self { d: self.d, max_order: self.max_order, terms }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.d, self.max_order.min(other.max_order));
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma.order() + mb.order() <= out.max_order {
                    out.add_term(ma.add(mb), &ca.mul(cb));
                }
            }
        }
        out
    }

    /// `∂/∂w_k`.
    pub fn partial(&self, k: usize) -> Self {
        let mut out = Self::zero(self.d, self.max_order);
        for (m, c) in &self.terms {
            let e = m.exponents()[k];
            if e == 0 {
                continue;
            }
            let mut exps = m.exponents().to_vec();
            exps[k] -= 1;
            out.add_term(MultiIndex::new(exps), &c.scale(&T::from_i64(e as i64)));
        }
        out
    }

    /// Terms of total degree exactly `n`.
    pub fn homogeneous(&self, n: usize) -> BTreeMap<MultiIndex, Poly<T>> {
        self.terms.iter().filter(|(m, _)| m.order() == n).map(|(m, c)| (m.clone(), c.clone())).collect()
    }
}

/// Vector series as one scalar series per component.
pub type VecWSeries<T> = Vec<WSeries<T>>;

/// Splits a table `m ↦ q_m(x) ∈ ℂ^d[x]` into component series.
pub fn components<T: Scalar>(
    table: &BTreeMap<MultiIndex, VecPoly<T>>,
    d: usize,
    max_order: usize,
) -> VecWSeries<T> {
    let mut out = vec![WSeries::zero(d, max_order); d];
    for (m, v) in table {
        for (i, series) in out.iter_mut().enumerate() {
            series.add_term(m.clone(), &v.component(i));
        }
    }
    out
}

/// Reassembles component series of one homogeneous degree into a table.
pub fn homogeneous_table<T: Scalar>(series: &[WSeries<T>], n: usize) -> BTreeMap<MultiIndex, VecPoly<T>> {
    let mut out = BTreeMap::new();
    for m in MultiIndex::all_of_order(series.len(), n) {
        let comps: Vec<Poly<T>> =
            series.iter().map(|s| s.terms().get(&m).cloned().unwrap_or_else(Poly::zero)).collect();
        let v = VecPoly::from_components(&comps);
        if !v.is_zero() {
            out.insert(m, v);
        }
    }
    out
}

/// `Σ_m q_m(x) U^m` for a table `q` and component series `U`.
pub fn substitute<'a, T: Scalar>(
    table: impl IntoIterator<Item = (&'a MultiIndex, &'a VecPoly<T>)>,
    u: &[WSeries<T>],
    max_order: usize,
) -> VecWSeries<T> {
    let d = u.len();
    let mut powers: Vec<Vec<WSeries<T>>> = u.iter().map(|uk| vec![WSeries::one(d, max_order), uk.clone()]).collect();
    let mut out = vec![WSeries::zero(d, max_order); d];
    for (m, q) in table {
        if m.order() > max_order {
            continue;
        }
        let mut monomial = WSeries::one(d, max_order);
        for (k, &e) in m.exponents().iter().enumerate() {
            while powers[k].len() <= e as usize {
                let next = powers[k].last().expect("nonempty").mul(&u[k]);
                powers[k].push(next);
            }
            monomial = monomial.mul(&powers[k][e as usize]);
        }
        for (i, acc) in out.iter_mut().enumerate() {
            *acc = acc.add(&monomial.scale_poly(&q.component(i)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::CRational;

    fn q(n: i64, d: i64) -> CRational {
        CRational::from_ratio(n, d)
    }

    #[test]
    fn square_of_shifted_coordinate() {
        // (w + w²/2)² = w² + w³ + w⁴/4
        let mut u = WSeries::coordinate(1, 0, 4);
        u.add_term(MultiIndex::new(vec![2]), &Poly::constant(q(1, 2)));
        let sq = u.mul(&u);
        assert_eq!(sq.terms()[&MultiIndex::new(vec![2])], Poly::constant(q(1, 1)));
        assert_eq!(sq.terms()[&MultiIndex::new(vec![3])], Poly::constant(q(1, 1)));
        assert_eq!(sq.terms()[&MultiIndex::new(vec![4])], Poly::constant(q(1, 4)));
        let short = WSeries { max_order: 3, ..u.clone() };
        assert!(short.mul(&short).homogeneous(4).is_empty());
    }

    #[test]
    fn partial_derivative_and_substitution() {
        let d = 2;
        let mut s = WSeries::zero(d, 5);
        s.add_term(MultiIndex::new(vec![2, 1]), &Poly::new(vec![q(0, 1), q(3, 1)]));
        let ds = s.partial(0);
        assert_eq!(ds.terms()[&MultiIndex::new(vec![1, 1])], Poly::new(vec![q(0, 1), q(6, 1)]));
        assert!(s.partial(1).terms().contains_key(&MultiIndex::new(vec![2, 0])));

        let mut table = BTreeMap::new();
        table.insert(MultiIndex::new(vec![1, 1]), VecPoly::new(2, vec![vec![q(1, 1), q(0, 1)]]).unwrap());
        let u = vec![WSeries::coordinate(d, 0, 3), WSeries::coordinate(d, 1, 3)];
        let out = substitute(&table, &u, 3);
        let back = homogeneous_table(&out, 2);
        assert_eq!(back, table);
    }
}
