//! Independent numerical cross-checks for the closed-form designs.

mod consistency;
mod disk;
mod factor;
mod quad;
mod sweep;

pub use consistency::{equalized_error_state_space, psd_consistency};
pub use disk::{
    disk_minimize_pointwise, relaxed_objective, DiskResolution, DiskSearchResult,
    QuadraticObjective,
};
pub use factor::{
    numerical_spectral_factorization, wiener_filter_by_factorization, FactorizationResult,
    WienerOracle, GAIN_CONVENTION,
};
pub use quad::band_mse;
pub use sweep::{default_band, threshold_sweep, OnsetBracket, SweepPoint, SweepResult};

use serde::{Deserialize, Serialize};

use crate::io::REPORT_SCHEMA;

/// JSON wrapper shared by every persisted oracle result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope<T> {
    pub schema: String,
    pub kind: String,
    pub created_unix: u64,
    pub payload: T,
}

impl<T> ReportEnvelope<T> {
    pub fn new(kind: impl Into<String>, payload: T) -> Self {
        ReportEnvelope {
            schema: REPORT_SCHEMA.to_string(),
            kind: kind.into(),
            created_unix: crate::design::DesignReport::stamp(),
            payload,
        }
    }
}
