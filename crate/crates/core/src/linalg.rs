//! Small dense complex-matrix helpers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QeqError, Result};

pub type CMatrix = DMatrix<Complex64>;

pub fn cmat_from_real(rows: usize, cols: usize, data_row_major: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(
        rows,
        cols,
        data_row_major.iter().map(|&x| Complex64::new(x, 0.0)),
    )
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).iter().all(|d| d.norm() <= tol)
}

pub fn is_symmetric(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).iter().all(|d| d.norm() <= tol)
}

/// Eigenvalues of a general complex square matrix.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 1000 * n)
        .ok_or(QeqError::RootFindingFailure { degree: n })?;
    let ev = schur
        .eigenvalues()
        .ok_or(QeqError::RootFindingFailure { degree: n })?;
    Ok(ev.iter().copied().collect())
}

/// Largest real part over the spectrum.
pub fn spectral_abscissa(m: &CMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    nalgebra::linalg::SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_rotation_is_one() {
        let m = cmat_from_real(2, 2, &[0.6, 0.8, -0.8, 0.6]);
        assert!((spectral_norm(&m) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn abscissa_of_diagonal() {
        let m = cmat_from_real(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
        assert!((spectral_abscissa(&m).unwrap() + 1.0).abs() < 1e-14);
    }
}
