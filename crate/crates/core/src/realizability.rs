//! Physical-realizability and passivity checks.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QeqError, Result};
use crate::grid::FrequencyGrid;
use crate::linalg::{is_hermitian, is_symmetric, min_hermitian_eigenvalue, spectral_norm, CMatrix};
use crate::rational::RationalC;
use crate::statespace::StateSpaceModel;
use crate::transfer::TransferMatrix;

/// Default paraunitarity tolerance for constant matrices.
pub const CONSTANT_PARAUNITARY_TOL: f64 = 1e-10;
/// Default paraunitarity tolerance for rational matrices sampled on a grid.
pub const RATIONAL_PARAUNITARY_TOL: f64 = 1e-8;

const STRUCTURE_TOL: f64 = 1e-12;

/// Stationary Gaussian white-noise description: `Σ` (excess over vacuum) and
/// the pairing covariance `Π`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    sigma: CMatrix,
    pi: CMatrix,
    label: String,
}

impl NoiseSpec {
    pub fn new(sigma: CMatrix, pi: CMatrix, label: impl Into<String>) -> Result<Self> {
        if sigma.shape() != pi.shape() || !sigma.is_square() {
            return Err(QeqError::DimensionMismatch(format!(
                "noise covariances must be square and equal-sized: sigma {:?}, pi {:?}",
                sigma.shape(),
                pi.shape()
            )));
        }
        if !is_hermitian(&sigma, STRUCTURE_TOL) {
            return Err(QeqError::Invalid("sigma must be Hermitian".into()));
        }
        if !is_symmetric(&pi, STRUCTURE_TOL) {
            return Err(QeqError::Invalid("pi must be symmetric".into()));
        }
        if min_hermitian_eigenvalue(&sigma) < -STRUCTURE_TOL {
            return Err(QeqError::Invalid(
                "sigma must be positive semidefinite".into(),
            ));
        }
        Ok(NoiseSpec {
            sigma,
            pi,
            label: label.into(),
        })
    }

    /// `Σ = 0, Π = 0`.
    pub fn vacuum(n: usize) -> Self {
        NoiseSpec {
            sigma: CMatrix::zeros(n, n),
            pi: CMatrix::zeros(n, n),
            label: "vacuum".into(),
        }
    }

    /// Diagonal thermal noise `Σ = diag(variances)`, `Π = 0`.
    pub fn thermal(variances: &[f64]) -> Result<Self> {
        if let Some(v) = variances.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(QeqError::domain("thermal variance", *v, "[0, inf)"));
        }
        let n = variances.len();
        let sigma = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            variances.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        Ok(NoiseSpec {
            sigma,
            pi: CMatrix::zeros(n, n),
            label: "thermal".into(),
        })
    }

    pub fn sigma(&self) -> &CMatrix {
        &self.sigma
    }

    pub fn pi(&self) -> &CMatrix {
        &self.pi
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn require_no_pairing(&self) -> Result<()> {
        if self.pi.iter().any(|v| *v != Complex64::new(0.0, 0.0)) {
            return Err(QeqError::PairingUnsupported);
        }
        Ok(())
    }

    /// Total spectrum `I + Σᵀ` seen by the annihilation channel.
    pub fn spectrum(&self) -> CMatrix {
        CMatrix::identity(self.dim(), self.dim()) + self.sigma.transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizabilityReport {
    /// `‖AΘ + ΘA† + BB†‖`
    pub lyapunov_residual: f64,
    /// `‖B + ΘC†‖`
    pub coupling_residual: f64,
    /// `‖D − I‖`
    pub feedthrough_residual: f64,
    pub passed: bool,
    pub tolerance: f64,
}

/// Evaluates the passive realizability conditions with `Θ = I`.
pub fn check_physical_realizability(model: &StateSpaceModel, tol: f64) -> RealizabilityReport {
    let (a, b, c, d) = (model.a(), model.b(), model.c(), model.d());
    let lyapunov_residual = spectral_norm(&(a + a.adjoint() + b * b.adjoint()));
    let coupling_residual = if b.shape() == (c.ncols(), c.nrows()) {
        spectral_norm(&(b + c.adjoint()))
    } else {
        f64::INFINITY
    };
    let feedthrough_residual = spectral_norm(&(d - CMatrix::identity(d.nrows(), d.ncols())));
    let square = d.is_square();
    let passed = square
        && lyapunov_residual <= tol
        && coupling_residual <= tol
        && feedthrough_residual <= tol;
    RealizabilityReport {
        lyapunov_residual,
        coupling_residual,
        feedthrough_residual,
        passed,
        tolerance: tol,
    }
}

/// Realizability up to a static unitary output network: `A + A† + BB† = 0`,
/// `B = −C†D` and `DD† = I`. Such a model is an identity-feedthrough system
/// followed by the beam-splitter network `D`.
pub fn check_passive_realizability(model: &StateSpaceModel, tol: f64) -> RealizabilityReport {
    let (a, b, c, d) = (model.a(), model.b(), model.c(), model.d());
    let lyapunov_residual = spectral_norm(&(a + a.adjoint() + b * b.adjoint()));
    let square = d.is_square() && d.nrows() == c.nrows();
    let coupling_residual = if square && b.shape() == (c.ncols(), c.nrows()) {
        spectral_norm(&(b + c.adjoint() * d))
    } else {
        f64::INFINITY
    };
    let feedthrough_residual = if square {
        spectral_norm(&(d * d.adjoint() - CMatrix::identity(d.nrows(), d.nrows())))
    } else {
        f64::INFINITY
    };
    RealizabilityReport {
        lyapunov_residual,
        coupling_residual,
        feedthrough_residual,
        passed: lyapunov_residual <= tol && coupling_residual <= tol && feedthrough_residual <= tol,
        tolerance: tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParaunitarityReport {
    /// Worst `‖T(iω)T(iω)† − I‖₂` over the grid.
    pub max_residual: f64,
    pub worst_frequency: f64,
    pub passed: bool,
    pub tolerance: f64,
}

/// Maps `f` over the grid frequencies in parallel, preserving order.
pub(crate) fn map_grid<T, F>(grid: &FrequencyGrid, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    grid.points().par_iter().map(|&w| f(w)).collect()
}

fn worst(values: &[f64], grid: &FrequencyGrid) -> (f64, f64) {
    values
        .iter()
        .zip(grid.points())
        .fold((0.0, grid.points()[0]), |(best, at), (&v, &w)| {
            if v > best {
                (v, w)
            } else {
                (best, at)
            }
        })
}

pub fn check_paraunitary(
    t: &TransferMatrix,
    grid: &FrequencyGrid,
    tol: f64,
) -> Result<ParaunitarityReport> {
    if !t.is_square() {
        return Err(QeqError::DimensionMismatch(format!(
            "paraunitarity needs a square matrix, got {}x{}",
            t.rows(),
            t.cols()
        )));
    }
    let n = t.rows();
    let residuals = map_grid(grid, |w| {
        let v = t.eval_iw(w)?;
        Ok(spectral_norm(&(&v * v.adjoint() - CMatrix::identity(n, n))))
    })?;
    let (max_residual, worst_frequency) = worst(&residuals, grid);
    Ok(ParaunitarityReport {
        max_residual,
        worst_frequency,
        passed: max_residual <= tol,
        tolerance: tol,
    })
}

/// Residuals of the three block identities of a 2×2 paraunitary equalizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockConstraintReport {
    /// `max |H11 H11~ + H12 H12~ − 1|`
    pub first_row: f64,
    /// `max |H11 H21~ + H12 H22~|`
    pub cross_rows: f64,
    /// `max |H21 H21~ + H22 H22~ − 1|`
    pub second_row: f64,
    pub passed: bool,
    pub tolerance: f64,
}

impl BlockConstraintReport {
    /// Names of the identities whose residual exceeds the tolerance.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.first_row <= self.tolerance) {
            out.push(format!(
                "first-row identity H11·H11~ + H12·H12~ = 1 (residual {:e})",
                self.first_row
            ));
        }
        if !(self.cross_rows <= self.tolerance) {
            out.push(format!(
                "cross-row identity H11·H21~ + H12·H22~ = 0 (residual {:e})",
                self.cross_rows
            ));
        }
        if !(self.second_row <= self.tolerance) {
            out.push(format!(
                "second-row identity H21·H21~ + H22·H22~ = 1 (residual {:e})",
                self.second_row
            ));
        }
        out
    }

    pub fn max(&self) -> f64 {
        self.first_row.max(self.cross_rows).max(self.second_row)
    }
}

pub fn check_block_constraints(
    h11: &RationalC,
    h12: &RationalC,
    h21: &RationalC,
    h22: &RationalC,
    grid: &FrequencyGrid,
    tol: f64,
) -> Result<BlockConstraintReport> {
    let triples = map_grid(grid, |w| {
        let (a, b, c, d) = (
            h11.eval_iw(w)?,
            h12.eval_iw(w)?,
            h21.eval_iw(w)?,
            h22.eval_iw(w)?,
        );
        Ok([
            (a.norm_sqr() + b.norm_sqr() - 1.0).abs(),
            (a * c.conj() + b * d.conj()).norm(),
            (c.norm_sqr() + d.norm_sqr() - 1.0).abs(),
        ])
    })?;
    let col = |k: usize| triples.iter().map(|t| t[k]).fold(0.0, f64::max);
    let (first_row, cross_rows, second_row) = (col(0), col(1), col(2));
    Ok(BlockConstraintReport {
        first_row,
        cross_rows,
        second_row,
        passed: first_row <= tol && cross_rows <= tol && second_row <= tol,
        tolerance: tol,
    })
}

/// `min over the grid of 1 − |H11(iω)|²`.
pub fn contraction_margin(h11: &RationalC, grid: &FrequencyGrid) -> Result<f64> {
    let v = map_grid(grid, |w| Ok(1.0 - h11.eval_iw(w)?.norm_sqr()))?;
    Ok(v.into_iter().fold(f64::INFINITY, f64::min))
}
