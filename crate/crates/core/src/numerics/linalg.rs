use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use super::Cplx;

/// Field element usable as a matrix entry.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Send
    + Sync
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn from_f64(v: f64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn conj(self) -> Self {
        self
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn from_f64(v: f64) -> Self {
        v
    }
}

impl Scalar for Cplx {
    fn zero() -> Self {
        Cplx::new(0.0, 0.0)
    }
    fn one() -> Self {
        Cplx::new(1.0, 0.0)
    }
    fn conj(self) -> Self {
        Cplx::conj(&self)
    }
    fn norm_sqr(self) -> f64 {
        Cplx::norm_sqr(&self)
    }
    fn from_f64(v: f64) -> Self {
        Cplx::new(v, 0.0)
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type CMat = Mat<Cplx>;
pub type RMat = Mat<f64>;

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major `data`; `None` when the length is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Self { rows, cols, data })
    }

    /// # Panics
    /// If the rows are ragged.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// Conjugate transpose (plain transpose for real matrices).
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    /// # Panics
    /// On inner-dimension mismatch.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs[(k, c)];
                }
            }
        }
        out
    }

    /// # Panics
    /// If `v.len() != self.cols()`.
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "vector length mismatch");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `Aᴴ v` without forming the adjoint.
    pub fn adjoint_mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len(), "vector length mismatch");
        let mut out = vec![T::zero(); self.cols];
        for r in 0..self.rows {
            for (c, o) in out.iter_mut().enumerate() {
                *o += self[(r, c)].conj() * v[r];
            }
        }
        out
    }

    /// Gram matrix `AᴴA`.
    pub fn gram(&self) -> Self {
        let mut g = Self::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut acc = T::zero();
                for r in 0..self.rows {
                    acc += self[(r, i)].conj() * self[(r, j)];
                }
                g[(i, j)] = acc;
                g[(j, i)] = acc.conj();
            }
        }
        g
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| (a - b).norm_sqr().sqrt())
            .fold(0.0, f64::max)
    }

    /// Solves `A x = b` for square `A` by Gaussian elimination with partial
    /// pivoting. `None` if `A` is numerically singular.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        let n = self.rows;
        assert_eq!(self.cols, n, "solve needs a square matrix");
        assert_eq!(b.len(), n);
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        let scale = a.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max).sqrt();
        if scale == 0.0 {
            return None;
        }
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i * n + col].norm_sqr().total_cmp(&a[j * n + col].norm_sqr()))?;
            if a[piv * n + col].norm_sqr().sqrt() <= 1e-14 * scale {
                return None;
            }
            if piv != col {
                for c in 0..n {
                    a.swap(piv * n + c, col * n + c);
                }
                x.swap(piv, col);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                if f == T::zero() {
                    continue;
                }
                for c in col..n {
                    let v = a[col * n + c];
                    a[r * n + c] -= f * v;
                }
                let xc = x[col];
                x[r] -= f * xc;
            }
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in r + 1..n {
                acc -= a[r * n + c] * x[c];
            }
            x[r] = acc / a[r * n + r];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for c in 0..n {
            let mut e = vec![T::zero(); n];
            e[c] = T::one();
            let col = self.solve(&e)?;
            for (r, v) in col.into_iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        Some(out)
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Lower-triangular Cholesky factor of a symmetric 2×2 matrix.
/// `None` unless the matrix is positive definite.
pub fn cholesky2(k: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let l00 = k[0][0].sqrt();
    if !(l00 > 0.0) || !l00.is_finite() {
        return None;
    }
    let l10 = k[1][0] / l00;
    let rem = k[1][1] - l10 * l10;
    // Relative floor: a rank-one block leaves only rounding noise here.
    if !(rem > 1e-13 * k[1][1].abs().max(k[0][0].abs())) {
        return None;
    }
    Some([[l00, 0.0], [l10, rem.sqrt()]])
}
