use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QeqError, Result};
use crate::grid::FrequencyGrid;
use crate::rational::{RationalC, IMAGINARY_AXIS_TOL};
use crate::realizability::{map_grid, NoiseSpec};
use crate::transfer::TransferMatrix;

pub const GAIN_CONVENTION: &str =
    "stable poles, minimum-phase zeros, positive real leading coefficient";

/// Relative tolerance for para-Hermitian symmetry and realness on the axis.
const SYMMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationResult {
    pub factor: RationalC,
    /// `max |W(iω)W~(iω) − S(iω)|` over the grid.
    pub max_residual: f64,
    /// Relative spread of the per-frequency gain estimates.
    pub gain_spread: f64,
    pub gain_convention: String,
}

fn is_on_axis(r: Complex64) -> bool {
    r.re.abs() <= IMAGINARY_AXIS_TOL * r.norm().max(1.0)
}

/// Canonical factor `W` with `W·W~ = S`, built by splitting the zeros and poles
/// of `S` between the half-planes.
pub fn numerical_spectral_factorization(
    s: &RationalC,
    grid: &FrequencyGrid,
) -> Result<FactorizationResult> {
    let conj = s.para_conjugate();
    for p in [
        Complex64::new(0.37, 0.81),
        Complex64::new(-1.3, 0.2),
        Complex64::new(2.1, -3.4),
    ] {
        if let (Ok(a), Ok(b)) = (s.eval(p), conj.eval(p)) {
            if (a - b).norm() > SYMMETRY_TOL * a.norm().max(1.0) {
                return Err(QeqError::Invalid("spectrum is not para-Hermitian".into()));
            }
        }
    }
    let zpk = s.zpk()?;
    if let Some(&root) = zpk.zeros.iter().chain(&zpk.poles).find(|r| is_on_axis(**r)) {
        return Err(QeqError::AxisRoot { root });
    }
    let left = |v: &[Complex64]| v.iter().copied().filter(|r| r.re < 0.0).collect::<Vec<_>>();
    let (lz, lp) = (left(&zpk.zeros), left(&zpk.poles));
    if 2 * lz.len() != zpk.zeros.len() || 2 * lp.len() != zpk.poles.len() {
        return Err(QeqError::Invalid(
            "zeros and poles of the spectrum do not split evenly between half-planes".into(),
        ));
    }
    let shape = RationalC::from_zpk(&lz, &lp, Complex64::new(1.0, 0.0));

    let estimates = map_grid(grid, |w| {
        let v = s.eval_iw(w)?;
        if v.im.abs() > SYMMETRY_TOL * v.norm().max(1.0) {
            return Err(QeqError::Invalid(format!(
                "spectrum is not real at omega = {w}"
            )));
        }
        if !(v.re > 0.0) {
            return Err(QeqError::SpectrumNotPositive {
                omega: w,
                value: v.re,
            });
        }
        Ok(v.re / shape.eval_iw(w)?.norm_sqr())
    })?;
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let (lo, hi) = estimates
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
            (lo.min(e), hi.max(e))
        });
    let factor = shape.scale_real(mean.sqrt());
    let residuals = map_grid(grid, |w| {
        Ok((factor.eval_iw(w)?.norm_sqr() - s.eval_iw(w)?.re).abs())
    })?;
    Ok(FactorizationResult {
        factor,
        max_residual: residuals.into_iter().fold(0.0, f64::max),
        gain_spread: (hi - lo) / mean,
        gain_convention: GAIN_CONVENTION.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WienerOracle {
    /// Spectrum `(1+Σb)G11G11~ + G12(I+Σwᵀ)G12~ − 1` of the relaxed problem.
    pub spectrum: RationalC,
    pub factorization: FactorizationResult,
    /// Causal minimizer `[(1+Σb)G11~/W~]_+ / W` of the relaxed error spectrum.
    pub filter: RationalC,
}

/// Unconstrained causal minimizer of the relaxed scalar error spectrum, computed
/// from the channel blocks alone.
pub fn wiener_filter_by_factorization(
    g11: &RationalC,
    g12: &TransferMatrix,
    sigma_b: f64,
    noise_w: &NoiseSpec,
    grid: &FrequencyGrid,
) -> Result<WienerOracle> {
    noise_w.require_no_pairing()?;
    if g12.rows() != 1 || g12.cols() != noise_w.dim() {
        return Err(QeqError::DimensionMismatch(
            "noise row and noise covariance disagree".into(),
        ));
    }
    let sw = TransferMatrix::constant(&noise_w.spectrum());
    let noise_power = g12.try_mul(&sw)?.try_mul(&g12.para_conjugate())?;
    let signal = (g11 * &g11.para_conjugate()).scale_real(1.0 + sigma_b);
    let spectrum = &(&signal + noise_power.get(0, 0)) - &RationalC::one();
    let factorization = numerical_spectral_factorization(&spectrum, grid)?;
    let target = g11
        .para_conjugate()
        .scale_real(1.0 + sigma_b)
        .try_div(&factorization.factor.para_conjugate())?;
    let filter = target.causal_part()?.try_div(&factorization.factor)?;
    Ok(WienerOracle {
        spectrum,
        factorization,
        filter,
    })
}
