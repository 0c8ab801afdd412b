//! Dense complex matrices and vectors.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C64};

/// Dense row-major matrix over a [`Scalar`] field.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type CMatrix = Matrix<C64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, T::one())
    }

    /// `c·I` of size `n`.
    pub fn scalar(n: usize, c: T) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c.clone();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_row_major(r, c, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn to_c64(&self) -> CMatrix {
        self.map(Scalar::to_c64)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    fn check_same_shape(&self, other: &Self, op: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{op}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        Ok(self.zip_with(other, |a, b| a.clone() + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        Ok(self.zip_with(other, |a, b| a.clone() - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Panicking addition for internally consistent shapes.
    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("matrix add shape")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("matrix sub shape")
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix add shape");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = a.clone() + b;
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|a| a.clone() * c)
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a.clone())
    }

    /// `self + c·I`.
    pub fn shift(&self, c: &T) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] = m[(i, i)].clone() + c;
        }
        m
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "mul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_exact_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * &other[(k, j)];
                    out[(i, j)] = out[(i, j)].clone() + prod;
                }
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("matrix mul shape")
    }

    pub fn try_mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if self.cols != v.len() {
            return Err(Error::Shape(format!(
                "mul_vec: {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_exact_zero())
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b)
            })
            .collect())
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        self.try_mul_vec(v).expect("matrix-vector shape")
    }

    /// Maximum entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    /// Induced infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(Scalar::magnitude).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_zero_tol(&self, tol: f64) -> bool {
        self.data.iter().all(|a| a.is_zero_tol(tol))
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + &self[(i, i)])
    }

    /// Block copy of `block` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)].clone();
            }
        }
    }

    /// Solves `self · X = rhs` for a matrix right-hand side.
    pub fn solve_matrix(&self, rhs: &Self, tol: f64) -> Result<Self> {
        if !self.is_square() || self.rows != rhs.rows {
            return Err(Error::Shape(format!(
                "solve: {}x{} with rhs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = if T::EXACT {
                (col..n).find(|&r| !a[(r, col)].is_exact_zero())
            } else {
                (col..n)
                    .map(|r| (r, a[(r, col)].magnitude()))
                    .max_by(|x, y| x.1.total_cmp(&y.1))
                    .filter(|&(_, mag)| mag > tol * scale)
                    .map(|(r, _)| r)
            };
            let Some(p) = pivot else {
                return Err(Error::Singular(format!("no pivot in column {col} of {n}x{n} system")));
            };
            if p != col {
                for j in 0..n {
                    a.data.swap(p * n + j, col * n + j);
                }
                for j in 0..m {
                    b.data.swap(p * m + j, col * m + j);
                }
            }
            let inv = a[(col, col)].inv();
            for r in col + 1..n {
                if a[(r, col)].is_exact_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone() * &inv;
                for j in col..n {
                    let v = factor.clone() * &a[(col, j)];
                    a[(r, j)] = a[(r, j)].clone() - v;
                }
                for j in 0..m {
                    let v = factor.clone() * &b[(col, j)];
                    b[(r, j)] = b[(r, j)].clone() - v;
                }
            }
        }
        let mut x = Self::zeros(n, m);
        for j in 0..m {
            for i in (0..n).rev() {
                let mut acc = b[(i, j)].clone();
                for k in i + 1..n {
                    acc = acc - a[(i, k)].clone() * &x[(k, j)];
                }
                x[(i, j)] = acc / a[(i, i)].clone();
            }
        }
        Ok(x)
    }

    pub fn inverse(&self, tol: f64) -> Result<Self> {
        self.solve_matrix(&Self::identity(self.rows), tol)
    }

    /// Upper-triangularity test (entries strictly below the diagonal vanish).
    pub fn is_upper_triangular(&self, tol: f64) -> bool {
        (0..self.rows).all(|i| (0..i.min(self.cols)).all(|j| self[(i, j)].is_zero_tol(tol)))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.rows {
            list.entry(&&self.data[i * self.cols..(i + 1) * self.cols]);
        }
        list.finish()
    }
}

/// Solves `a·x = b`.
///
/// Floating mode uses partial pivoting and reports singularity when no pivot
/// exceeds `tol` relative to the largest entry of `a`; exact mode only fails
/// on a genuinely singular matrix.
pub fn solve_linear<T: Scalar>(a: &Matrix<T>, b: &[T], tol: f64) -> Result<Vec<T>> {
    let rhs = Matrix::from_row_major(b.len(), 1, b.to_vec())?;
    Ok(a.solve_matrix(&rhs, tol)?.data)
}

/// Eigenvalues with algebraic multiplicity, via a complex Schur decomposition.
pub fn mat_eigenvalues<T: Scalar>(m: &Matrix<T>, tol: f64) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::Shape(format!("eigenvalues of {}x{} matrix", m.rows, m.cols)));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let dm = DMatrix::from_fn(n, n, |i, j| m[(i, j)].to_c64());
    let eps = tol.clamp(f64::EPSILON, 1e-10) * 1e-3;
    let schur = nalgebra::linalg::Schur::try_new(dm, eps, 10_000).ok_or(Error::NoConvergence)?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

pub mod vector {
    //! Helpers for plain `Vec<T>` vectors.
    use crate::scalar::Scalar;

    pub fn zeros<T: Scalar>(n: usize) -> Vec<T> {
        vec![T::zero(); n]
    }

    pub fn unit<T: Scalar>(n: usize, i: usize) -> Vec<T> {
        let mut v = zeros(n);
        v[i] = T::one();
        v
    }

    pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
        assert_eq!(a.len(), b.len(), "vector add length");
        a.iter().zip(b).map(|(x, y)| x.clone() + y).collect()
    }

    pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
        assert_eq!(a.len(), b.len(), "vector sub length");
        a.iter().zip(b).map(|(x, y)| x.clone() - y).collect()
    }

    pub fn scale<T: Scalar>(a: &[T], c: &T) -> Vec<T> {
        a.iter().map(|x| x.clone() * c).collect()
    }

    pub fn axpy<T: Scalar>(acc: &mut [T], c: &T, x: &[T]) {
        assert_eq!(acc.len(), x.len(), "axpy length");
        for (a, b) in acc.iter_mut().zip(x) {
            *a = a.clone() + c.clone() * b;
        }
    }

    pub fn max_abs<T: Scalar>(a: &[T]) -> f64 {
        a.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn is_zero_tol<T: Scalar>(a: &[T], tol: f64) -> bool {
        a.iter().all(|x| x.is_zero_tol(tol))
    }
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let norm = a.norm_inf();
    let mut squarings = 0u32;
    if norm > 0.25 {
        squarings = (norm / 0.25).log2().ceil() as u32;
    }
    let scaled = a.scale(&C64::new(0.5f64.powi(squarings as i32), 0.0));
    let mut term = Matrix::identity(n);
    let mut sum = Matrix::identity(n);
    for k in 1..=30 {
        term = term.mul(&scaled).scale(&C64::new(1.0 / k as f64, 0.0));
        sum.add_assign(&term);
        if term.max_abs() <= f64::EPSILON * 1e-3 * sum.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum);
    }
    sum
}

/// `z^B = exp(B·log z)` with the logarithm `log z = ln|z| + i·arg`, where the
/// caller supplies the argument so that one consistent branch is used.
pub fn matrix_power(b: &CMatrix, modulus: f64, arg: f64) -> CMatrix {
    let log = C64::new(modulus.ln(), arg);
    expm(&b.scale(&log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::CRational;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn eigenvalues_of_identity_and_diagonal() {
        let ev = mat_eigenvalues(&CMatrix::identity(3), 1e-12).unwrap();
        assert!(ev.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-12));
        let d = CMatrix::from_diagonal(&[c(2.0, 0.0), c(-0.5, 0.0)]);
        let ev = sorted(mat_eigenvalues(&d, 1e-12).unwrap());
        assert!((ev[0] - c(-0.5, 0.0)).norm() < 1e-12);
        assert!((ev[1] - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_rotation() {
        let m = CMatrix::from_rows(vec![vec![c(0., 0.), c(1., 0.)], vec![c(-1., 0.), c(0., 0.)]])
            .unwrap();
        let ev = sorted(mat_eigenvalues(&m, 1e-12).unwrap());
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_reject_non_square() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(mat_eigenvalues(&m, 1e-12), Err(Error::Shape(_))));
    }

    #[test]
    fn triangular_eigenvalues_are_diagonal() {
        let m = CMatrix::from_rows(vec![
            vec![c(1., 1.), c(3., 0.), c(-2., 1.)],
            vec![c(0., 0.), c(-0.5, 2.), c(4., 0.)],
            vec![c(0., 0.), c(0., 0.), c(2.5, 0.)],
        ])
        .unwrap();
        let ev = mat_eigenvalues(&m, 1e-12).unwrap();
        for d in [c(1., 1.), c(-0.5, 2.), c(2.5, 0.)] {
            assert!(ev.iter().any(|z| (z - d).norm() < 1e-10));
        }
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let v = vec![c(1., 2.), c(-3., 0.5)];
        assert_eq!(solve_linear(&CMatrix::identity(2), &v, 1e-12).unwrap(), v);
        let a = CMatrix::from_diagonal(&[c(2., 0.), c(4., 0.)]);
        let x = solve_linear(&a, &[c(2., 0.), c(8., 0.)], 1e-12).unwrap();
        assert_eq!(x, vec![c(1., 0.), c(2., 0.)]);
    }

    #[test]
    fn solve_reports_singular() {
        let a = CMatrix::from_rows(vec![vec![c(1., 0.), c(2., 0.)], vec![c(2., 0.), c(4., 0.)]])
            .unwrap();
        assert!(matches!(solve_linear(&a, &[c(1., 0.), c(1., 0.)], 1e-12), Err(Error::Singular(_))));
        let q = a.map(|z| CRational::from_i64(z.re as i64));
        let b = vec![CRational::one(), CRational::one()];
        assert!(solve_linear(&q, &b, 0.0).is_err());
    }

    #[test]
    fn exact_solve_is_exact() {
        let a = Matrix::from_rows(vec![
            vec![CRational::from_i64(3), CRational::from_i64(1)],
            vec![CRational::from_i64(1), CRational::from_i64(2)],
        ])
        .unwrap();
        let b = vec![CRational::from_i64(1), CRational::from_i64(0)];
        let x = solve_linear(&a, &b, 0.0).unwrap();
        assert_eq!(x, vec![CRational::from_ratio(2, 5), CRational::from_ratio(-1, 5)]);
    }

    #[test]
    fn expm_of_diagonal() {
        let d = CMatrix::from_diagonal(&[c(1.0, 0.0), c(0.0, std::f64::consts::PI)]);
        let e = expm(&d);
        assert!((e[(0, 0)] - c(1f64.exp(), 0.0)).norm() < 1e-13);
        assert!((e[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-13);
        assert!(e[(0, 1)].norm() < 1e-15);
    }
}
