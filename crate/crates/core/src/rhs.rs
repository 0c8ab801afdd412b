//! Right-hand sides given by local power series.

use crate::matrix::vector;
use crate::poly::VecPoly;
use crate::scalar::{Scalar, C64};

/// A vector-valued function analytic on the region of interest, exposed
/// through its Taylor expansions.
pub trait SeriesProvider<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    /// Coefficients `c_0..c_order` of the expansion in powers of `x - center`.
    fn taylor(&self, center: &T, order: usize) -> Vec<Vec<T>>;

    fn eval(&self, x: &T) -> Vec<T> {
        self.taylor(x, 0).swap_remove(0)
    }

    /// The same function as an exact polynomial, when it is one.
    fn as_polynomial(&self) -> Option<VecPoly<T>> {
        None
    }
}

impl<T: Scalar> SeriesProvider<T> for VecPoly<T> {
    fn dim(&self) -> usize {
        VecPoly::dim(self)
    }

    fn taylor(&self, center: &T, order: usize) -> Vec<Vec<T>> {
        let mut c = self.taylor_shift(center);
        c.resize(order + 1, vector::zeros(VecPoly::dim(self)));
        c
    }

    fn eval(&self, x: &T) -> Vec<T> {
        VecPoly::eval(self, x)
    }

    fn as_polynomial(&self) -> Option<VecPoly<T>> {
        Some(self.clone())
    }
}

/// `g(x) = exp(α x) · p(x)` for a vector polynomial `p`.
#[derive(Clone, Debug)]
pub struct ExpPolyRhs {
    pub alpha: C64,
    pub poly: VecPoly<C64>,
}

impl SeriesProvider<C64> for ExpPolyRhs {
    fn dim(&self) -> usize {
        self.poly.dim()
    }

    fn taylor(&self, center: &C64, order: usize) -> Vec<Vec<C64>> {
        let mut e = Vec::with_capacity(order + 1);
        let mut term = (self.alpha * center).exp();
        for k in 0..=order {
            e.push(term);
            term = term * self.alpha / (k as f64 + 1.0);
        }
        scalar_times_vector_series(&e, &self.poly.taylor(center, order), order)
    }
}

/// Truncated product of scalar series.
pub fn series_mul<T: Scalar>(a: &[T], b: &[T], order: usize) -> Vec<T> {
    let mut out = vec![T::zero(); order + 1];
    for (i, x) in a.iter().enumerate().take(order + 1) {
        if x.is_exact_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] = out[i + j].clone() + x.clone() * y;
        }
    }
    out
}

/// Truncated product of a scalar series with a vector series.
pub fn scalar_times_vector_series<T: Scalar>(a: &[T], v: &[Vec<T>], order: usize) -> Vec<Vec<T>> {
    let dim = v.first().map_or(0, Vec::len);
    let mut out = vec![vector::zeros(dim); order + 1];
    for (i, x) in a.iter().enumerate().take(order + 1) {
        if x.is_exact_zero() {
            continue;
        }
        for (j, y) in v.iter().enumerate().take(order + 1 - i) {
            vector::axpy(&mut out[i + j], x, y);
        }
    }
    out
}

/// Series of `1 / (t + c)` in `t`, for `c ≠ 0`.
pub fn reciprocal_linear_series<T: Scalar>(c: &T, order: usize) -> Vec<T> {
    let inv = c.inv();
    let mut out = Vec::with_capacity(order + 1);
    let mut term = inv.clone();
    for _ in 0..=order {
        out.push(term.clone());
        term = -(term * &inv);
    }
    out
}

/// Series of `Π_k 1 / (x - p_k)` around `center`; every `p_k` must differ
/// from the center.
pub fn reciprocal_product_series<'a, T: Scalar>(
    center: &T,
    roots: impl IntoIterator<Item = &'a T>,
    order: usize,
) -> Vec<T> {
    let mut acc = vec![T::zero(); order + 1];
    acc[0] = T::one();
    for p in roots {
        acc = series_mul(&acc, &reciprocal_linear_series(&(center.clone() - p), order), order);
    }
    acc
}
