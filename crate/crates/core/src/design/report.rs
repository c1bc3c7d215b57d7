use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::FrequencyGrid;
use crate::io::REPORT_SCHEMA;
use crate::rational::RationalC;
use crate::realizability::{
    check_block_constraints, check_paraunitary, contraction_margin, BlockConstraintReport,
    ParaunitarityReport,
};
use crate::transfer::TransferMatrix;

use crate::psd::error_psd_relaxed;
use crate::realizability::NoiseSpec;

use super::{
    beam_splitter_channel, cavity_channel, Adjudication, BeamSplitterChannel, CavityChannel,
    CavityIntermediates, CavityThreshold,
};

/// Verification tolerance for assembled designs.
pub const DESIGN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ChannelParams {
    BeamSplitter(BeamSplitterChannel),
    Cavity(CavityChannel),
}

/// Channel data consumed by the relaxed scalar error spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedChannel {
    pub g11: RationalC,
    pub g12: TransferMatrix,
    pub noise_b: NoiseSpec,
    pub noise_w: NoiseSpec,
}

impl RelaxedChannel {
    /// Relaxed error spectrum for a given `H11`.
    pub fn error_psd(&self, h11: &RationalC) -> Result<RationalC> {
        error_psd_relaxed(h11, &self.g11, &self.g12, &self.noise_b, &self.noise_w)
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelParams::BeamSplitter(c) => c.validate(),
            ChannelParams::Cavity(c) => c.validate(),
        }
    }

    pub fn relaxed_channel(&self) -> Result<RelaxedChannel> {
        match self {
            ChannelParams::BeamSplitter(c) => {
                c.validate()?;
                let g = beam_splitter_channel(c.eta)?;
                Ok(RelaxedChannel {
                    g11: g.get(0, 0).clone(),
                    g12: g.block(0, 1, 1, 1)?,
                    noise_b: NoiseSpec::thermal(&[c.sigma_b2])?,
                    noise_w: NoiseSpec::thermal(&[c.sigma_w2])?,
                })
            }
            ChannelParams::Cavity(c) => {
                let b = cavity_channel(c)?;
                Ok(RelaxedChannel {
                    g11: b.g11,
                    g12: b.g12,
                    noise_b: NoiseSpec::vacuum(1),
                    noise_w: c.noise()?,
                })
            }
        }
    }

    /// Grid the design is verified on.
    pub fn verification_grid(&self, linear_points: usize) -> Result<FrequencyGrid> {
        match self {
            ChannelParams::BeamSplitter(_) => Ok(FrequencyGrid::static_default()),
            ChannelParams::Cavity(c) => FrequencyGrid::cavity(-c.omega, c.gamma, linear_points),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualizerBlocks {
    pub h11: RationalC,
    pub h12: RationalC,
    pub h21: RationalC,
    pub h22: RationalC,
}

impl EqualizerBlocks {
    pub fn identity() -> Self {
        EqualizerBlocks {
            h11: RationalC::one(),
            h12: RationalC::zero(),
            h21: RationalC::zero(),
            h22: RationalC::one(),
        }
    }

    pub fn to_matrix(&self) -> TransferMatrix {
        TransferMatrix::new(
            2,
            2,
            vec![
                self.h11.clone(),
                self.h12.clone(),
                self.h21.clone(),
                self.h22.clone(),
            ],
        )
        .expect("2x2")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `sqrt(eta) / (1 - eta)` for the beam splitter.
    pub beam_splitter: Option<f64>,
    pub cavity: Option<CavityThreshold>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub paraunitarity: ParaunitarityReport,
    pub block_constraints: BlockConstraintReport,
    /// `min over the grid of 1 - |H11(iω)|²`.
    pub contraction_margin: f64,
    pub grid_points: usize,
    pub grid_description: String,
}

impl Residuals {
    pub fn compute(blocks: &EqualizerBlocks, grid: &FrequencyGrid, tol: f64) -> Result<Self> {
        Ok(Residuals {
            paraunitarity: check_paraunitary(&blocks.to_matrix(), grid, tol)?,
            block_constraints: check_block_constraints(
                &blocks.h11,
                &blocks.h12,
                &blocks.h21,
                &blocks.h22,
                grid,
                tol,
            )?,
            contraction_margin: contraction_margin(&blocks.h11, grid)?,
            grid_points: grid.len(),
            grid_description: grid.description().to_string(),
        })
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.paraunitarity.max_residual <= tol
            && self.block_constraints.max() <= tol
            && self.contraction_margin >= -tol
    }
}

/// Persisted result of an equalizer design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub schema: String,
    /// Seconds since the Unix epoch; the only field that varies between identical runs.
    pub created_unix: u64,
    pub channel: ChannelParams,
    pub thresholds: Thresholds,
    /// Whether the equalizer strictly improves on the identity filter.
    pub improves: bool,
    pub blocks: EqualizerBlocks,
    /// Error spectrum with the designed equalizer.
    pub optimal_error_psd: RationalC,
    /// Constant value of the optimal error spectrum for static channels.
    pub optimal_error_constant: Option<f64>,
    /// Error spectrum with `H = I`.
    pub unequalized_error_psd: RationalC,
    pub residuals: Residuals,
    pub tolerance: f64,
    pub intermediates: Option<CavityIntermediates>,
    pub adjudication: Option<Adjudication>,
}

impl DesignReport {
    pub fn stamp() -> u64 {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    }

    pub fn schema() -> &'static str {
        REPORT_SCHEMA
    }
}
