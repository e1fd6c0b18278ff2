//! Dense complex linear algebra for the small matrices used throughout the
//! crate (dimension up to a few dozen).
//!
//! Nothing here calls into BLAS/LAPACK; the eigensolver, characteristic
//! polynomial, SVD and propagator are all self-contained and generic over
//! [`Real`] so they can run in double-double arithmetic.

mod charpoly;
mod eig;
mod evolve;
mod svd;

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{cabs, from_c64, to_c64, Real};

pub use charpoly::{aberth_roots, characteristic_polynomial, charpoly_eigenvalues};
pub use eig::{
    cluster_tolerance, default_rtol, eig, eig_default, eigenvalues, sort_spectrum, spectral_order,
    SortKey, Spectrum,
};
pub use evolve::{evolve, nilpotent_certificate};
pub use svd::{numerical_rank, singular_values};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has dimension zero")]
    Empty,
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("QR iteration did not converge for eigenvalue {index} after {iterations} iterations")]
    NonConvergence { index: usize, iterations: usize },
    #[error("eigenpair {index} has backward error {residual:e} above bound {bound:e}")]
    ResidualBound {
        index: usize,
        residual: f64,
        bound: f64,
    },
    #[error("vector length {got} does not match matrix dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is defective (eigenvector condition {condition:e}) and not certified as a single Jordan block")]
    Defective { condition: f64 },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexDense<T = f64> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexDense<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Build from row vectors; fails unless the rows form a square array of
    /// finite entries.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        for r in &rows {
            if r.len() != dim {
                return Err(LinalgError::NotSquare {
                    rows: dim,
                    cols: r.len(),
                });
            }
        }
        let m = Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&x| Complex::new(T::from_f64(x), T::zero()))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn diagonal(values: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn check_finite(&self) -> Result<()> {
        for (k, z) in self.data.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(LinalgError::NonFinite {
                    row: k / self.dim,
                    col: k % self.dim,
                });
            }
        }
        Ok(())
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex<T>]> {
        self.data.chunks(self.dim)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        let scale = self.max_abs();
        if scale == T::zero() {
            return scale;
        }
        let mut acc = T::zero();
        for z in &self.data {
            let a = cabs(*z) / scale;
            acc += a * a;
        }
        scale * acc.sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |m, z| m.max(cabs(*z)))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(i, j)].conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// `self + s·I`
    pub fn shift(&self, s: Complex<T>) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m[(i, i)] = m[(i, i)] + s;
        }
        m
    }

    pub fn matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.rows()
            .map(|r| {
                r.iter()
                    .zip(x)
                    .fold(Complex::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max(cabs(a - b)))
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn to_f64(&self) -> ComplexDense<f64> {
        ComplexDense {
            dim: self.dim,
            data: self.data.iter().map(|&z| to_c64(z)).collect(),
        }
    }

    pub fn cast<U: Real>(&self) -> ComplexDense<U> {
        ComplexDense {
            dim: self.dim,
            data: self.data.iter().map(|&z| from_c64(to_c64(z))).collect(),
        }
    }
}

impl ComplexDense<f64> {
    /// Promote to another precision; exact because every `f64` is
    /// representable in the wider types.
    pub fn promote<U: Real>(&self) -> ComplexDense<U> {
        self.cast()
    }
}

impl<T> Index<(usize, usize)> for ComplexDense<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexDense<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Mul for &ComplexDense<T> {
    type Output = ComplexDense<T>;
    fn mul(self, rhs: Self) -> ComplexDense<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        let n = self.dim;
        let mut out = ComplexDense::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &ComplexDense<T> {
    type Output = ComplexDense<T>;
    fn add(self, rhs: Self) -> ComplexDense<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sum");
        ComplexDense {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexDense<T> {
    type Output = ComplexDense<T>;
    fn sub(self, rhs: Self) -> ComplexDense<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in difference");
        ComplexDense {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

/// `m^k` by repeated multiplication; `m^0` is the identity.
pub fn matrix_power<T: Real>(m: &ComplexDense<T>, k: u32) -> ComplexDense<T> {
    let mut out = ComplexDense::identity(m.dim());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// Jordan block with `value` on the diagonal and ones on the superdiagonal.
pub fn jordan_block<T: Real>(dim: usize, value: Complex<T>) -> ComplexDense<T> {
    ComplexDense::from_fn(dim, |i, j| {
        if i == j {
            value
        } else if j == i + 1 {
            Complex::one()
        } else {
            Complex::zero()
        }
    })
}

pub fn vec_norm<T: Real>(x: &[Complex<T>]) -> T {
    let scale = x.iter().fold(T::zero(), |m, z| m.max(cabs(*z)));
    if scale == T::zero() {
        return scale;
    }
    let acc = x.iter().fold(T::zero(), |acc, z| {
        let a = cabs(*z) / scale;
        acc + a * a
    });
    scale * acc.sqrt()
}

/// `⟨a|b⟩ = Σ conj(a_i) b_i`
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::zero(), |acc, (&x, &y)| acc + x.conj() * y)
}
