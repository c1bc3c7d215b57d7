use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Design and verify passive coherent equalizers for linear quantum channels
#[derive(Parser, Debug)]
#[command(name = "qeq", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Optimal equalizer for a static beam-splitter channel
    DesignBeamsplitter(BeamSplitterArgs),
    /// Optimal causal equalizer for the cavity chain
    DesignCavity(CavityArgs),
    /// Re-check the residuals of a saved design report
    Verify(VerifyArgs),
    /// Write error spectra of a saved design as CSV
    Psd(PsdArgs),
    /// Sweep one channel parameter and record where equalization starts to help
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Plain-text `key = value` file; flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Linear grid points for cavity checks (default 2001, or QEQ_GRID_POINTS)
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Verification tolerance
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Seed for randomized spot checks
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct BeamSplitterArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub sigma_w2: Option<f64>,
    #[arg(long)]
    pub sigma_b2: Option<f64>,
    /// Report path; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the error spectra as CSV
    #[arg(long)]
    pub psd_csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CavityArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Cavity detuning Ω
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub sigma_v2: Option<f64>,
    #[arg(long)]
    pub sigma_w2: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub psd_csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PsdArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Lower end of a custom linear grid
    #[arg(long, allow_hyphen_values = true)]
    pub omega_min: Option<f64>,
    /// Upper end of a custom linear grid
    #[arg(long, allow_hyphen_values = true)]
    pub omega_max: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SweepArgs {
    #[command(flatten)]
    pub channel: CavityArgs,
    /// `beamsplitter` or `cavity`
    #[arg(long)]
    pub family: Option<String>,
    /// Parameter to sweep, e.g. `sigma_w2`
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub sigma_b2: Option<f64>,
    /// JSON envelope path, in addition to the CSV written to `--out`
    #[arg(long)]
    pub json: Option<PathBuf>,
}
