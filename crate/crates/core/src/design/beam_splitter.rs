use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QeqError, Result};
use crate::grid::FrequencyGrid;
use crate::linalg::cmat_from_real;
use crate::psd::error_psd_relaxed;
use crate::rational::RationalC;
use crate::realizability::NoiseSpec;
use crate::transfer::TransferMatrix;

use super::report::{ChannelParams, DesignReport, EqualizerBlocks, Residuals, Thresholds};
use super::{check_nonnegative, check_open_unit, DESIGN_TOL};

/// Absolute tolerance applied when comparing a variance against a threshold.
const THRESHOLD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterChannel {
    pub eta: f64,
    pub sigma_w2: f64,
    #[serde(default)]
    pub sigma_b2: f64,
}

impl BeamSplitterChannel {
    pub fn new(eta: f64, sigma_w2: f64, sigma_b2: f64) -> Result<Self> {
        let ch = BeamSplitterChannel {
            eta,
            sigma_w2,
            sigma_b2,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("eta", self.eta)?;
        check_nonnegative("sigma_w2", self.sigma_w2)?;
        check_nonnegative("sigma_b2", self.sigma_b2)
    }

    /// Optimal error spectrum value; constant because the channel is static.
    pub fn optimal_error(&self) -> Result<f64> {
        let eta = self.eta;
        let noise = self.sigma_w2 * (1.0 - eta);
        if self.sigma_w2 <= beam_splitter_threshold(eta)? + THRESHOLD_TOL {
            Ok(noise - 2.0 * eta.sqrt() + 2.0)
        } else {
            Ok(2.0 - eta / noise)
        }
    }

    /// Error spectrum value with `H = I`.
    pub fn unequalized_error(&self) -> f64 {
        (1.0 + self.sigma_b2) * (self.eta.sqrt() - 1.0).powi(2)
            + (1.0 - self.eta) * (1.0 + self.sigma_w2)
    }
}

/// `[[√η, √(1−η)], [−√(1−η), √η]]`
pub fn beam_splitter_channel(eta: f64) -> Result<TransferMatrix> {
    check_open_unit("eta", eta)?;
    let (a, b) = (eta.sqrt(), (1.0 - eta).sqrt());
    Ok(TransferMatrix::constant(&cmat_from_real(
        2,
        2,
        &[a, b, -b, a],
    )))
}

/// Auxiliary-noise variance at or below which the identity filter is optimal.
pub fn beam_splitter_threshold(eta: f64) -> Result<f64> {
    check_open_unit("eta", eta)?;
    Ok(eta.sqrt() / (1.0 - eta))
}

fn optimal_blocks(ch: &BeamSplitterChannel) -> Result<EqualizerBlocks> {
    if ch.sigma_w2 <= beam_splitter_threshold(ch.eta)? + THRESHOLD_TOL {
        return Ok(EqualizerBlocks::identity());
    }
    let noise = ch.sigma_w2 * (1.0 - ch.eta);
    let h11 = ch.eta.sqrt() / noise;
    let h12 = (1.0 - ch.eta / (noise * noise)).max(0.0).sqrt();
    Ok(EqualizerBlocks {
        h11: RationalC::real(h11),
        h12: RationalC::real(h12),
        h21: RationalC::real(-h12),
        h22: RationalC::real(h11),
    })
}

pub fn design_beam_splitter_equalizer(ch: &BeamSplitterChannel) -> Result<DesignReport> {
    ch.validate()?;
    if ch.sigma_b2 != 0.0 {
        return Err(QeqError::UnsupportedNoise(format!(
            "closed-form beam-splitter design assumes vacuum message noise, got sigma_b2 = {}",
            ch.sigma_b2
        )));
    }
    let blocks = optimal_blocks(ch)?;
    let g = beam_splitter_channel(ch.eta)?;
    let g12 = g.block(0, 1, 1, 1)?;
    let noise_b = NoiseSpec::vacuum(1);
    let noise_w = NoiseSpec::thermal(&[ch.sigma_w2])?;
    let optimal = error_psd_relaxed(&blocks.h11, g.get(0, 0), &g12, &noise_b, &noise_w)?;
    let unequalized = error_psd_relaxed(&RationalC::one(), g.get(0, 0), &g12, &noise_b, &noise_w)?;

    let p_opt = ch.optimal_error()?;
    let p_rational = optimal.eval(Complex64::new(0.0, 0.0))?.re;
    if (p_rational - p_opt).abs() > 1e-9 * p_opt.abs().max(1.0) {
        return Err(QeqError::Invalid(format!(
            "closed-form optimum {p_opt} disagrees with the evaluated spectrum {p_rational}"
        )));
    }
    let residuals = Residuals::compute(&blocks, &FrequencyGrid::static_default(), DESIGN_TOL)?;
    let threshold = beam_splitter_threshold(ch.eta)?;
    Ok(DesignReport {
        schema: DesignReport::schema().to_string(),
        created_unix: DesignReport::stamp(),
        channel: ChannelParams::BeamSplitter(*ch),
        thresholds: Thresholds {
            beam_splitter: Some(threshold),
            cavity: None,
        },
        improves: ch.sigma_w2 > threshold + THRESHOLD_TOL,
        blocks,
        optimal_error_psd: optimal,
        optimal_error_constant: Some(p_opt),
        unequalized_error_psd: unequalized,
        residuals,
        tolerance: DESIGN_TOL,
        intermediates: None,
        adjudication: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_entries() {
        let g = beam_splitter_channel(0.25).unwrap().eval_iw(0.0).unwrap();
        assert!((g[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((g[(1, 0)].re + 0.75f64.sqrt()).abs() < 1e-15);
        assert!(beam_splitter_channel(1.0).is_err());
    }

    #[test]
    fn both_branches() {
        let r = design_beam_splitter_equalizer(&BeamSplitterChannel::new(0.5, 2.0, 0.0).unwrap())
            .unwrap();
        assert!((r.optimal_error_constant.unwrap() - 1.5).abs() < 1e-12);
        assert!(r.improves);
        let r = design_beam_splitter_equalizer(&BeamSplitterChannel::new(0.5, 1.0, 0.0).unwrap())
            .unwrap();
        assert!((r.optimal_error_constant.unwrap() - (2.5 - 2f64.sqrt())).abs() < 1e-12);
        assert!(!r.improves);
    }

    #[test]
    fn message_noise_rejected() {
        let ch = BeamSplitterChannel::new(0.5, 1.0, 0.1).unwrap();
        assert!(matches!(
            design_beam_splitter_equalizer(&ch),
            Err(QeqError::UnsupportedNoise(_))
        ));
    }
}
