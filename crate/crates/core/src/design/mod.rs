//! Closed-form equalizer synthesis for the two channel topologies: a static
//! beam splitter and a cavity chain between two beam splitters.

mod beam_splitter;
mod cavity;
mod report;

pub use beam_splitter::{
    beam_splitter_channel, beam_splitter_threshold, design_beam_splitter_equalizer,
    BeamSplitterChannel,
};
pub use cavity::{
    assemble_cavity_equalizer, assemble_cavity_equalizer_on, cavity_channel,
    cavity_channel_state_space, cavity_equalizer_blocks, cavity_equalizer_state_space, cavity_tf,
    cavity_threshold, completion_constants, passive_first_order_realization, q_causal_part,
    q_function, spectral_factor_m, wiener_h11, zeta_rho, Adjudication, CavityBlocks, CavityChannel,
    CavityIntermediates, CavityThreshold, CompletionConstants,
};
pub use report::{
    ChannelParams, DesignReport, EqualizerBlocks, RelaxedChannel, Residuals, Thresholds, DESIGN_TOL,
};

use crate::error::{QeqError, Result};

pub(crate) fn check_open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(QeqError::domain(name, v, "(0, 1)"))
    }
}

pub(crate) fn check_nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(QeqError::domain(name, v, "[0, inf)"))
    }
}
