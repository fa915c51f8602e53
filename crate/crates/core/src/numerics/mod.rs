//! Dense complex linear algebra, matrix classification and the classical
//! eigendecomposition oracle.

mod matrix;
pub mod oracle;
pub mod random;

pub use matrix::{ComplexMatrix, ComplexVector, C64, ONE, ZERO};
pub use oracle::{
    eigenspace_fidelity, eigenspace_fidelity_with, nearest_eigenvalue, oracle_eigendecompose, SpectralPair,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for matrix classification.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Structural class of a square matrix, from strictest to loosest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixClass {
    Unitary,
    Density,
    Hermitian,
    Normal,
    General,
}

impl MatrixClass {
    pub fn is_normal(self) -> bool {
        self != MatrixClass::General
    }

    pub fn is_hermitian(self) -> bool {
        matches!(self, MatrixClass::Hermitian | MatrixClass::Density)
    }
}

/// Returns the strictest class whose defining Frobenius residual is within `tol`.
///
/// A Hermitian unitary (e.g. a Pauli matrix) is reported as unitary; a
/// density matrix is Hermitian, positive semidefinite and of unit trace.
pub fn classify_matrix(m: &ComplexMatrix, tol: f64) -> MatrixClass {
    if m.unitarity_residual() <= tol {
        return MatrixClass::Unitary;
    }
    if m.hermiticity_residual() <= tol {
        if is_density(m, tol) {
            return MatrixClass::Density;
        }
        return MatrixClass::Hermitian;
    }
    if m.normality_residual() <= tol {
        return MatrixClass::Normal;
    }
    MatrixClass::General
}

fn is_density(m: &ComplexMatrix, tol: f64) -> bool {
    let tr = m.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return false;
    }
    min_eigenvalue(m).is_some_and(|min| min >= -tol)
}

/// Smallest eigenvalue (real part) of a normal matrix, `None` if the oracle rejects it.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Option<f64> {
    oracle_eigendecompose(m)
        .ok()
        .and_then(|pairs| pairs.last().map(|p| p.eigenvalue.re))
}

pub fn ensure_unitary(m: &ComplexMatrix, tol: f64) -> Result<()> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let residual = m.unitarity_residual();
    if residual > tol {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

pub fn ensure_normal(m: &ComplexMatrix, tol: f64) -> Result<()> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let residual = m.normality_residual();
    if residual > tol {
        return Err(Error::NotNormal { residual });
    }
    Ok(())
}

/// `A + A†`, Hermitian for every square `A`.
pub fn hermitize(a: &ComplexMatrix) -> ComplexMatrix {
    a + &a.adjoint()
}

/// `e^{iH}` for Hermitian `H`, built from the oracle eigenpairs.
pub fn unitary_from_hermitian(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let residual = h.hermiticity_residual();
    if residual > 1e-10 {
        return Err(Error::NotHermitian { residual });
    }
    oracle::spectral_map(h, |mu| C64::new(0.0, mu.re).exp())
}
