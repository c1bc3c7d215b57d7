use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{assemble_cavity_equalizer_on, design_beam_splitter_equalizer, ChannelParams};
use crate::error::{QeqError, Result};
use crate::grid::FrequencyGrid;
use crate::io::csv_float;
use crate::psd::error_psd_relaxed;
use crate::rational::RationalC;
use crate::realizability::NoiseSpec;

use super::band_mse;

/// Band-MSE gain that counts as an improvement.
const IMPROVEMENT_TOL: f64 = 1e-9;
/// Linear grid points used for cavity designs inside a sweep.
const SWEEP_GRID_POINTS: usize = 401;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub p_unequalized: Option<f64>,
    pub p_equalized: Option<f64>,
    pub improved: bool,
    /// Design error for this point, if any; sweeps never abort on one.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnsetBracket {
    pub last_non_improving: f64,
    pub first_improving: f64,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub base: ChannelParams,
    pub parameter: String,
    /// Band over which the MSE values are integrated.
    pub band: [f64; 2],
    pub points: Vec<SweepPoint>,
    pub onset: Option<OnsetBracket>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["param", "value", "p_unequalized", "p_equalized", "improved"])?;
        let opt = |v: Option<f64>| v.map(csv_float).unwrap_or_default();
        for p in &self.points {
            w.write_record([
                self.parameter.clone(),
                csv_float(p.value),
                opt(p.p_unequalized),
                opt(p.p_equalized),
                p.improved.to_string(),
            ])?;
        }
        w.flush()
    }
}

fn with_parameter(base: &ChannelParams, name: &str, value: f64) -> Result<ChannelParams> {
    let unknown = || QeqError::Invalid(format!("unknown sweep parameter `{name}`"));
    Ok(match *base {
        ChannelParams::BeamSplitter(mut c) => {
            match name {
                "eta" => c.eta = value,
                "sigma_w2" => c.sigma_w2 = value,
                "sigma_b2" => c.sigma_b2 = value,
                _ => return Err(unknown()),
            }
            ChannelParams::BeamSplitter(c)
        }
        ChannelParams::Cavity(mut c) => {
            match name {
                "eta" => c.eta = value,
                "alpha" => c.alpha = value,
                "beta" => c.beta = value,
                "gamma" => c.gamma = value,
                "omega" => c.omega = value,
                "sigma_v2" => c.sigma_v2 = value,
                "sigma_w2" => c.sigma_w2 = value,
                _ => return Err(unknown()),
            }
            ChannelParams::Cavity(c)
        }
    })
}

/// Default integration band: `[−1, 1]` for the static channel, ten linewidths
/// around resonance for the cavity.
pub fn default_band(params: &ChannelParams) -> [f64; 2] {
    match params {
        ChannelParams::BeamSplitter(_) => [-1.0, 1.0],
        ChannelParams::Cavity(c) => [-c.omega - 10.0 * c.gamma, -c.omega + 10.0 * c.gamma],
    }
}

fn unequalized(params: &ChannelParams) -> Result<RationalC> {
    match params {
        ChannelParams::BeamSplitter(c) => {
            c.validate()?;
            Ok(RationalC::real(c.unequalized_error()))
        }
        ChannelParams::Cavity(c) => {
            let b = crate::design::cavity_channel(c)?;
            error_psd_relaxed(
                &RationalC::one(),
                &b.g11,
                &b.g12,
                &NoiseSpec::vacuum(1),
                &c.noise()?,
            )
        }
    }
}

fn equalized(params: &ChannelParams) -> Result<RationalC> {
    match params {
        ChannelParams::BeamSplitter(c) => Ok(design_beam_splitter_equalizer(c)?.optimal_error_psd),
        ChannelParams::Cavity(c) => {
            let grid: FrequencyGrid = c.grid(SWEEP_GRID_POINTS)?;
            Ok(assemble_cavity_equalizer_on(c, &grid)?.optimal_error_psd)
        }
    }
}

fn evaluate(params: &ChannelParams, value: f64, band: [f64; 2]) -> SweepPoint {
    let mse = |p: Result<RationalC>| p.and_then(|p| band_mse(&p, band[0], band[1]));
    let p_unequalized = mse(unequalized(params));
    let p_equalized = mse(equalized(params));
    let error = match (&p_unequalized, &p_equalized) {
        (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
        _ => None,
    };
    let (u, e) = (p_unequalized.ok(), p_equalized.ok());
    SweepPoint {
        value,
        p_unequalized: u,
        p_equalized: e,
        improved: matches!((u, e), (Some(u), Some(e)) if u - e > IMPROVEMENT_TOL),
        error,
    }
}

/// Designs the equalizer at `steps` evenly spaced values of one parameter and
/// brackets the first transition to strict improvement.
pub fn threshold_sweep(
    base: &ChannelParams,
    parameter: &str,
    range: [f64; 2],
    steps: usize,
) -> Result<SweepResult> {
    if steps < 2 || !(range[0] < range[1]) {
        return Err(QeqError::Invalid(
            "sweep needs an increasing range and at least two steps".into(),
        ));
    }
    with_parameter(base, parameter, range[0])?;
    let h = (range[1] - range[0]) / (steps - 1) as f64;
    let points: Vec<SweepPoint> = (0..steps)
        .into_par_iter()
        .map(|i| {
            let value = if i + 1 == steps {
                range[1]
            } else {
                range[0] + h * i as f64
            };
            let params = with_parameter(base, parameter, value).expect("parameter checked");
            let band = default_band(&params);
            evaluate(&params, value, band)
        })
        .collect();
    let onset = points
        .windows(2)
        .find(|w| !w[0].improved && w[1].improved)
        .map(|w| OnsetBracket {
            last_non_improving: w[0].value,
            first_improving: w[1].value,
            estimate: 0.5 * (w[0].value + w[1].value),
        });
    Ok(SweepResult {
        base: base.clone(),
        parameter: parameter.to_string(),
        band: default_band(base),
        points,
        onset,
    })
}
