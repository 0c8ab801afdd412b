//! Truncated power series with matrix coefficients.

use crate::fuchsian::FuchsianSystem;
use crate::matrix::{CMatrix, Matrix};
use crate::rhs::{reciprocal_linear_series, series_mul};
use crate::scalar::{Scalar, C64};

/// Taylor coefficients of `B(x)` at a point that is not a pole, or of its
/// regular part `Σ_{k≠skip} B_k / (x - p_k)` at `p_skip`.
pub(crate) fn coefficient_series(
    sys: &FuchsianSystem<C64>,
    center: C64,
    skip: Option<usize>,
    order: usize,
) -> Vec<CMatrix> {
    let n = sys.dim();
    let mut out = vec![Matrix::zeros(n, n); order + 1];
    for (k, (p, b)) in sys.poles().iter().zip(sys.residues()).enumerate() {
        if Some(k) == skip {
            continue;
        }
        for (l, c) in reciprocal_linear_series(&(center - p), order).into_iter().enumerate() {
            out[l].add_assign(&b.scale(&c));
        }
    }
    out
}

/// Series of `x^i` around `center`.
pub(crate) fn power_series(center: C64, i: usize, order: usize) -> Vec<C64> {
    let mut acc = vec![C64::zero(); order + 1];
    acc[0] = C64::one();
    for _ in 0..i {
        acc = series_mul(&acc, &[center, C64::one()], order);
    }
    acc
}

pub(crate) fn mat_series_mul(a: &[CMatrix], b: &[CMatrix], order: usize) -> Vec<CMatrix> {
    let rows = a[0].rows();
    let cols = b[0].cols();
    let mut out = vec![Matrix::zeros(rows, cols); order + 1];
    for (i, x) in a.iter().enumerate().take(order + 1) {
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j].add_assign(&x.mul(y));
        }
    }
    out
}

pub(crate) fn scalar_mat_series_mul(a: &[C64], b: &[CMatrix], order: usize) -> Vec<CMatrix> {
    let mut out = vec![Matrix::zeros(b[0].rows(), b[0].cols()); order + 1];
    for (i, x) in a.iter().enumerate().take(order + 1) {
        if *x == C64::zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j].add_assign(&y.scale(x));
        }
    }
    out
}

/// `Σ c_n t^n` by Horner's rule.
pub(crate) fn eval_mat_series(c: &[CMatrix], t: C64) -> CMatrix {
    let mut acc = Matrix::zeros(c[0].rows(), c[0].cols());
    for m in c.iter().rev() {
        acc = acc.scale(&t).add(m);
    }
    acc
}

/// Argument of `z` shifted by a multiple of `2π` to lie within `π` of
/// `anchor`.
pub(crate) fn arg_near(z: C64, anchor: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let a = z.arg();
    a + ((anchor - a) / tau).round() * tau
}
