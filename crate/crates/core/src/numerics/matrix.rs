//! Dense complex vectors and square matrices.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex vector.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexVector(Vec<C64>);

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Self {
        ComplexVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexVector(vec![ZERO; dim])
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = ONE;
        v
    }

    pub fn from_real(entries: &[f64]) -> Self {
        ComplexVector(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Returns the vector scaled to unit norm. A zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        self.scale(C64::new(1.0 / n, 0.0))
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        ComplexVector(self.0.iter().map(|z| z * factor).collect())
    }

    /// Outer product `|self⟩⟨other|`.
    pub fn outer(&self, other: &ComplexVector) -> ComplexMatrix {
        assert_eq!(self.dim(), other.dim(), "outer product of unequal dims");
        let n = self.dim();
        ComplexMatrix::from_fn(n, |i, j| self.0[i] * other.0[j].conj())
    }

    /// Projector `|self⟩⟨self|`.
    pub fn projector(&self) -> ComplexMatrix {
        self.outer(self)
    }

    /// Tensor product `self ⊗ other`; `self` occupies the most significant index.
    pub fn kron(&self, other: &ComplexVector) -> ComplexVector {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.0 {
            for b in &other.0 {
                out.push(a * b);
            }
        }
        ComplexVector(out)
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Sub<&ComplexVector> for &ComplexVector {
    type Output = ComplexVector;
    fn sub(self, rhs: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), rhs.dim());
        ComplexVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add<&ComplexVector> for &ComplexVector {
    type Output = ComplexVector;
    fn add(self, rhs: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), rhs.dim());
        ComplexVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { dim, data }
    }

    pub fn diag(entries: &[C64]) -> Self {
        Self::from_fn(entries.len(), |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        Self::from_fn(entries.len(), |i, j| {
            if i == j {
                C64::new(entries[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Builds a matrix from rows, rejecting ragged or non-square input and
    /// non-finite entries.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Config("matrix has no rows".into()));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    row: r,
                    len: row.len(),
                });
            }
        }
        let m = ComplexMatrix {
            dim: n,
            data: rows.into_iter().flatten().collect(),
        };
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[ComplexVector]) -> Self {
        let n = cols.len();
        Self::from_fn(n, |i, j| cols[j][i])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> impl Iterator<Item = &[C64]> {
        self.data.chunks(self.dim)
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector::new((0..self.dim).map(|i| self[(i, j)]).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, factor: C64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_dim(self.dim, other.dim)?;
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        check_dim(self.dim, v.dim())?;
        Ok(ComplexVector::new(
            self.rows()
                .map(|row| row.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |i, j| self[(i / m, j / m)] * other[(i % m, j % m)])
    }

    /// `‖M†M − I‖_F`.
    pub fn unitarity_residual(&self) -> f64 {
        let prod = &self.adjoint() * self;
        (&prod - &ComplexMatrix::identity(self.dim)).frobenius_norm()
    }

    /// `‖M − M†‖_F`.
    pub fn hermiticity_residual(&self) -> f64 {
        (self - &self.adjoint()).frobenius_norm()
    }

    /// `‖MM† − M†M‖_F`.
    pub fn normality_residual(&self) -> f64 {
        let adj = self.adjoint();
        (&(self * &adj) - &(&adj * self)).frobenius_norm()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix add dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sub dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}
