//! Dense row-major matrices and the kernels the iterations are built from.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Products with at least this many multiply-adds are split across rows on
/// the rayon pool when the `parallel` feature is on.
#[cfg(feature = "parallel")]
const PAR_MATMUL_MIN_WORK: usize = 32 * 32 * 32;

/// Dense `rows x cols` matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RealMatrix = Matrix<f64>;
pub type ComplexMatrix = Matrix<Complex64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// Build from row-major data. Fails if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Build from nested rows; every row must have the same length.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(Error::InvalidArgument("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(nrows, ncols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Error unless every entry is finite; `what` names the matrix in the message.
    pub fn ensure_finite(&self, what: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|v| v.scale(factor))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, op: &'static str, f: impl Fn(T, T) -> T) -> Result<Self> {
        same_shape(self, other, op)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `I - self`
    pub fn identity_minus(&self) -> Result<Self> {
        require_square(self, "identity_minus")?;
        let n = self.rows;
        Ok(Matrix::from_fn(n, n, |i, j| {
            let delta = if i == j { T::one() } else { T::zero() };
            delta - self[(i, j)]
        }))
    }

    /// Largest `|a_ij - b_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        same_shape(self, other, "max_abs_diff")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).norm_sqr().sqrt())
            .fold(0.0, f64::max))
    }

    /// Frobenius norm of `self - self^*`.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Promote to a complex matrix (imaginary parts of real inputs are zero).
    pub fn to_complex(&self) -> ComplexMatrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|v| Complex64::new(v.re(), v.im()))
                .collect(),
        }
    }

    /// The real part, if every imaginary part is exactly zero.
    pub fn to_real(&self) -> Option<RealMatrix> {
        if self.data.iter().any(|v| v.im() != 0.0) {
            return None;
        }
        Some(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.re()).collect(),
        })
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?} ", self.data[i * self.cols + j])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

fn same_shape<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, op: &'static str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            op,
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

fn require_square<T: Scalar>(a: &Matrix<T>, op: &'static str) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            op,
            rows: a.rows,
            cols: a.cols,
        });
    }
    Ok(())
}

/// One output row of `a * b` in i-k-j order: `out += a[i,k] * b[k,:]` for k ascending.
#[inline]
fn matmul_row<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, i: usize, out: &mut [T]) {
    let a_row = a.row(i);
    for (k, &a_ik) in a_row.iter().enumerate() {
        let b_row = b.row(k);
        for (o, &b_kj) in out.iter_mut().zip(b_row) {
            *o += a_ik * b_kj;
        }
    }
}

fn check_matmul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<()> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            op: "matmul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

/// Single-threaded `a * b`.
pub fn matmul_seq<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    check_matmul(a, b)?;
    let mut out = Matrix::zeros(a.rows, b.cols);
    if b.cols > 0 {
        for (i, row) in out.data.chunks_mut(b.cols).enumerate() {
            matmul_row(a, b, i, row);
        }
    }
    Ok(out)
}

/// Row-parallel `a * b`. Each output entry is reduced in the same order as
/// [`matmul_seq`], so the two agree bit for bit.
#[cfg(feature = "parallel")]
pub fn matmul_par<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    use rayon::prelude::*;

    check_matmul(a, b)?;
    let mut out = Matrix::zeros(a.rows, b.cols);
    if b.cols > 0 {
        out.data
            .par_chunks_mut(b.cols)
            .enumerate()
            .for_each(|(i, row)| matmul_row(a, b, i, row));
    }
    Ok(out)
}

/// `a * b`, dispatching to the parallel kernel for large products.
pub fn matmul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    #[cfg(feature = "parallel")]
    {
        if a.rows * a.cols * b.cols >= PAR_MATMUL_MIN_WORK && a.rows > 1 {
            return matmul_par(a, b);
        }
    }
    matmul_seq(a, b)
}

/// Transpose for real matrices, conjugate transpose for complex ones.
pub fn adjoint<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    Matrix::from_fn(a.cols, a.rows, |i, j| a[(j, i)].conj())
}

pub fn trace<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    require_square(a, "trace")?;
    let mut acc = T::zero();
    for i in 0..a.rows {
        acc += a[(i, i)];
    }
    Ok(acc)
}

/// `tr(a * b)` in O(n^2) without forming the product.
pub fn trace_of_product<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<T> {
    if a.cols != b.rows || a.rows != b.cols {
        return Err(Error::DimensionMismatch {
            op: "trace_of_product",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let mut acc = T::zero();
    for i in 0..a.rows {
        for j in 0..a.cols {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc)
}

pub fn frob_norm<T: Scalar>(a: &Matrix<T>) -> f64 {
    a.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius inner product `sum conj(a_ij) * b_ij`.
pub fn frob_inner<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<T> {
    same_shape(a, b, "frob_inner")?;
    let mut acc = T::zero();
    for (&x, &y) in a.data.iter().zip(&b.data) {
        acc += x.conj() * y;
    }
    Ok(acc)
}

/// `c0 * I + c1 * f + c2 * f2`, entrywise.
pub fn affine_combine<T: Scalar>(
    c0: f64,
    c1: f64,
    c2: f64,
    f: &Matrix<T>,
    f2: &Matrix<T>,
) -> Result<Matrix<T>> {
    require_square(f, "affine_combine")?;
    same_shape(f, f2, "affine_combine")?;
    let n = f.rows;
    let mut out = Matrix::zeros(n, n);
    for (idx, (o, (&a, &b))) in out
        .data
        .iter_mut()
        .zip(f.data.iter().zip(&f2.data))
        .enumerate()
    {
        let mut v = a.scale(c1) + b.scale(c2);
        if idx / n == idx % n {
            v += T::from_real(c0);
        }
        *o = v;
    }
    Ok(out)
}

/// A matrix whose element type is decided at run time (file input, generators).
#[derive(Clone, Debug, PartialEq)]
pub enum AnyMatrix {
    Real(RealMatrix),
    Complex(ComplexMatrix),
}

impl AnyMatrix {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            AnyMatrix::Real(m) => m.shape(),
            AnyMatrix::Complex(m) => m.shape(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, AnyMatrix::Complex(_))
    }

    pub fn into_complex(self) -> ComplexMatrix {
        match self {
            AnyMatrix::Real(m) => m.to_complex(),
            AnyMatrix::Complex(m) => m,
        }
    }
}

impl From<RealMatrix> for AnyMatrix {
    fn from(m: RealMatrix) -> Self {
        AnyMatrix::Real(m)
    }
}

impl From<ComplexMatrix> for AnyMatrix {
    fn from(m: ComplexMatrix) -> Self {
        AnyMatrix::Complex(m)
    }
}
