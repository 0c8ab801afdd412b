//! Polynomials in `x` with scalar, matrix and vector coefficients.
//!
//! Coefficients are stored in ascending powers. Constructors and arithmetic
//! drop trailing coefficients that are exactly zero; tolerance-based trimming
//! is explicit through `trimmed`. The zero polynomial has degree `None`.

use crate::error::{Error, Result};
use crate::matrix::{vector, Matrix};
use crate::scalar::Scalar;

fn trim_exact<C>(coeffs: &mut Vec<C>, is_zero: impl Fn(&C) -> bool) {
    while coeffs.last().is_some_and(&is_zero) {
        coeffs.pop();
    }
}

/// Scalar polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        trim_exact(&mut coeffs, T::is_exact_zero);
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `x - root`.
    pub fn linear(root: &T) -> Self {
        Self::new(vec![-root.clone(), T::one()])
    }

    pub fn monomial(k: usize, c: T) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[T]) -> Self {
        roots.iter().fold(Self::constant(T::one()), |acc, r| acc.mul(&Self::linear(r)))
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn trimmed(&self, tol: f64) -> Self {
        let mut c = self.coeffs.clone();
        trim_exact(&mut c, |a| a.is_zero_tol(tol));
        Self { coeffs: c }
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * &T::from_i64(k as i64))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + &other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - &other.coeff(k)).collect())
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b;
            }
        }
        Self::new(out)
    }

    /// Euclidean division by a polynomial with nonzero leading coefficient.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        let dd = divisor.degree().ok_or_else(|| Error::Invalid("division by zero polynomial".into()))?;
        let lead_inv = divisor.coeffs[dd].inv();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree().filter(|&n| n >= dd) else {
            return Ok((Self::zero(), self.clone()));
        };
        let mut quot = vec![T::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = rem[k + dd].clone() * &lead_inv;
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j].clone() - q.clone() * d;
            }
            quot[k] = q;
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Coefficients of the same polynomial in powers of `(x - center)`.
    pub fn taylor_shift(&self, center: &T) -> Vec<T> {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for k in (i..n.saturating_sub(1)).rev() {
                c[k] = c[k].clone() + center.clone() * &c[k + 1];
            }
        }
        c
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }
}

/// Polynomial with matrix coefficients of a fixed shape.
#[derive(Clone, Debug, PartialEq)]
pub struct MatPoly<T> {
    rows: usize,
    cols: usize,
    coeffs: Vec<Matrix<T>>,
}

impl<T: Scalar> MatPoly<T> {
    pub fn new(rows: usize, cols: usize, mut coeffs: Vec<Matrix<T>>) -> Result<Self> {
        if coeffs.iter().any(|m| m.rows() != rows || m.cols() != cols) {
            return Err(Error::Shape(format!("matrix polynomial coefficients must be {rows}x{cols}")));
        }
        trim_exact(&mut coeffs, |m| m.entries().iter().all(T::is_exact_zero));
        Ok(Self { rows, cols, coeffs })
    }

    fn from_parts(rows: usize, cols: usize, mut coeffs: Vec<Matrix<T>>) -> Self {
        trim_exact(&mut coeffs, |m| m.entries().iter().all(T::is_exact_zero));
        Self { rows, cols, coeffs }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self { rows, cols, coeffs: Vec::new() }
    }

    pub fn constant(m: Matrix<T>) -> Self {
        Self::from_parts(m.rows(), m.cols(), vec![m])
    }

    /// `x^k · m`.
    pub fn monomial(k: usize, m: Matrix<T>) -> Self {
        let (r, c) = (m.rows(), m.cols());
        let mut coeffs = vec![Matrix::zeros(r, c); k];
        coeffs.push(m);
        Self::from_parts(r, c, coeffs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn coeffs(&self) -> &[Matrix<T>] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Matrix<T> {
        self.coeffs.get(k).cloned().unwrap_or_else(|| Matrix::zeros(self.rows, self.cols))
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn trimmed(&self, tol: f64) -> Self {
        let mut c = self.coeffs.clone();
        trim_exact(&mut c, |m| m.is_zero_tol(tol));
        Self { rows: self.rows, cols: self.cols, coeffs: c }
    }

    pub fn eval(&self, x: &T) -> Matrix<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Matrix::zeros(self.rows, self.cols), |acc, c| acc.scale(x).add(c))
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale(&T::from_i64(k as i64)))
            .collect();
        Self::from_parts(self.rows, self.cols, coeffs)
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "matrix polynomials {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        Ok(Self::from_parts(self.rows, self.cols, (0..n).map(|k| self.coeff(k).add(&other.coeff(k))).collect()))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        Ok(Self::from_parts(self.rows, self.cols, (0..n).map(|k| self.coeff(k).sub(&other.coeff(k))).collect()))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("matrix polynomial shape")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("matrix polynomial shape")
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_parts(self.rows, self.cols, self.coeffs.iter().map(|m| m.scale(c)).collect())
    }

    pub fn mul_scalar_poly(&self, p: &Poly<T>) -> Self {
        if self.is_zero() || p.is_zero() {
            return Self::zero(self.rows, self.cols);
        }
        let mut out = vec![Matrix::zeros(self.rows, self.cols); self.coeffs.len() + p.coeffs().len() - 1];
        for (i, m) in self.coeffs.iter().enumerate() {
            for (j, a) in p.coeffs().iter().enumerate() {
                if !a.is_exact_zero() {
                    out[i + j].add_assign(&m.scale(a));
                }
            }
        }
        Self::from_parts(self.rows, self.cols, out)
    }

    /// Matrix product `self(x) · other(x)`.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "matrix polynomial product {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.rows, other.cols));
        }
        let mut out = vec![Matrix::zeros(self.rows, other.cols); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j].add_assign(&a.mul(b));
            }
        }
        Ok(Self::from_parts(self.rows, other.cols, out))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("matrix polynomial product shape")
    }

    pub fn try_mul_vec(&self, v: &VecPoly<T>) -> Result<VecPoly<T>> {
        if self.cols != v.dim() {
            return Err(Error::Shape(format!(
                "matrix polynomial {}x{} times vector polynomial of dimension {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        if self.is_zero() || v.is_zero() {
            return Ok(VecPoly::zero(self.rows));
        }
        let mut out = vec![vector::zeros(self.rows); self.coeffs.len() + v.coeffs().len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in v.coeffs().iter().enumerate() {
                let prod = a.mul_vec(b);
                out[i + j] = vector::add(&out[i + j], &prod);
            }
        }
        Ok(VecPoly::from_parts(self.rows, out))
    }

    pub fn mul_vec(&self, v: &VecPoly<T>) -> VecPoly<T> {
        self.try_mul_vec(v).expect("matrix polynomial times vector polynomial shape")
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(Matrix::max_abs).fold(0.0, f64::max)
    }
}

/// Polynomial with vector coefficients of a fixed dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct VecPoly<T> {
    dim: usize,
    coeffs: Vec<Vec<T>>,
}

impl<T: Scalar> VecPoly<T> {
    pub fn new(dim: usize, mut coeffs: Vec<Vec<T>>) -> Result<Self> {
        if coeffs.iter().any(|v| v.len() != dim) {
            return Err(Error::Shape(format!("vector polynomial coefficients must have length {dim}")));
        }
        trim_exact(&mut coeffs, |v| v.iter().all(T::is_exact_zero));
        Ok(Self { dim, coeffs })
    }

    pub(crate) fn from_parts(dim: usize, mut coeffs: Vec<Vec<T>>) -> Self {
        trim_exact(&mut coeffs, |v| v.iter().all(T::is_exact_zero));
        Self { dim, coeffs }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, coeffs: Vec::new() }
    }

    pub fn constant(v: Vec<T>) -> Self {
        Self::from_parts(v.len(), vec![v])
    }

    /// `x^k · v`.
    pub fn monomial(k: usize, v: Vec<T>) -> Self {
        let dim = v.len();
        let mut coeffs = vec![vector::zeros(dim); k];
        coeffs.push(v);
        Self::from_parts(dim, coeffs)
    }

    /// Stacks scalar polynomials as components.
    pub fn from_components(components: &[Poly<T>]) -> Self {
        let dim = components.len();
        let len = components.iter().map(|p| p.coeffs().len()).max().unwrap_or(0);
        let coeffs = (0..len).map(|k| components.iter().map(|p| p.coeff(k)).collect()).collect();
        Self::from_parts(dim, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[Vec<T>] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Vec<T> {
        self.coeffs.get(k).cloned().unwrap_or_else(|| vector::zeros(self.dim))
    }

    pub fn component(&self, i: usize) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|v| v[i].clone()).collect())
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn trimmed(&self, tol: f64) -> Self {
        let mut c = self.coeffs.clone();
        trim_exact(&mut c, |v| vector::is_zero_tol(v, tol));
        Self { dim: self.dim, coeffs: c }
    }

    pub fn eval(&self, x: &T) -> Vec<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(vector::zeros(self.dim), |acc, c| vector::add(&vector::scale(&acc, x), c))
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| vector::scale(c, &T::from_i64(k as i64)))
            .collect();
        Self::from_parts(self.dim, coeffs)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!("vector polynomials of dimension {} and {}", self.dim, other.dim)));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        Ok(Self::from_parts(self.dim, (0..n).map(|k| vector::add(&self.coeff(k), &other.coeff(k))).collect()))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        Ok(Self::from_parts(self.dim, (0..n).map(|k| vector::sub(&self.coeff(k), &other.coeff(k))).collect()))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("vector polynomial dimension")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("vector polynomial dimension")
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_parts(self.dim, self.coeffs.iter().map(|v| vector::scale(v, c)).collect())
    }

    pub fn mul_scalar_poly(&self, p: &Poly<T>) -> Self {
        if self.is_zero() || p.is_zero() {
            return Self::zero(self.dim);
        }
        let mut out = vec![vector::zeros(self.dim); self.coeffs.len() + p.coeffs().len() - 1];
        for (i, v) in self.coeffs.iter().enumerate() {
            for (j, a) in p.coeffs().iter().enumerate() {
                if !a.is_exact_zero() {
                    vector::axpy(&mut out[i + j], a, v);
                }
            }
        }
        Self::from_parts(self.dim, out)
    }

    /// Componentwise Euclidean division by a scalar polynomial.
    pub fn div_rem(&self, divisor: &Poly<T>) -> Result<(Self, Self)> {
        let mut quot = Vec::with_capacity(self.dim);
        let mut rem = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let (q, r) = self.component(i).div_rem(divisor)?;
            quot.push(q);
            rem.push(r);
        }
        let mut q = Self::from_components(&quot);
        let mut r = Self::from_components(&rem);
        q.dim = self.dim;
        r.dim = self.dim;
        Ok((q, r))
    }

    /// Coefficients in powers of `(x - center)`.
    pub fn taylor_shift(&self, center: &T) -> Vec<Vec<T>> {
        let comps: Vec<Vec<T>> = (0..self.dim).map(|i| self.component(i).taylor_shift(center)).collect();
        let len = self.coeffs.len();
        (0..len)
            .map(|k| comps.iter().map(|c| c.get(k).cloned().unwrap_or_else(T::zero)).collect())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|v| vector::max_abs(v)).fold(0.0, f64::max)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> VecPoly<U> {
        VecPoly::from_parts(self.dim, self.coeffs.iter().map(|v| v.iter().map(&f).collect()).collect())
    }
}
