//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "fockchan",
    version,
    about = "Loss suppression by noiseless attenuation and amplification: channel matrices, sweeps, tomography"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Choi matrix, fidelity and effective transmittance of one operating point.
    Choi(ChoiArgs),
    /// Figures of merit over a grid of losses and gains, as CSV or JSON.
    Sweep(SweepArgs),
    /// Simulated tomography of the protocol channel with ML reconstruction.
    Tomo(TomoArgs),
    /// Largest attenuation that still reaches a target fidelity.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    /// Gain fixed to `1/(ντ)`.
    Matched,
    /// No attenuation; gain defaults to the fidelity optimum.
    Naive,
}

#[derive(Debug, Args)]
pub struct ChoiArgs {
    /// Amplitude transmittance of the lossy line.
    #[arg(long)]
    pub tau: f64,
    /// Amplitude factor of the noiseless attenuator.
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Amplifier gain; derived from the strategy when omitted.
    #[arg(long)]
    pub gain: Option<f64>,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Fig4,
    Fixed,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpacingArg {
    Log,
    Linear,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON sweep configuration; see `--print-schema`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Print the configuration schema and exit.
    #[arg(long)]
    pub print_schema: bool,
    /// Amplitude transmittances, overriding the configuration.
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    #[arg(long)]
    pub gain_min: Option<f64>,
    #[arg(long)]
    pub gain_max: Option<f64>,
    #[arg(long)]
    pub gain_points: Option<usize>,
    #[arg(long, value_enum)]
    pub spacing: Option<SpacingArg>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,
    /// Attenuation for the `fixed` policy.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub truncation: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SettingsArg {
    /// Six polarization projectors plus the vacuum monitor.
    Canonical,
    /// Canonical set plus vacuum/one-photon superpositions.
    Extended,
}

#[derive(Debug, Args)]
pub struct TomoArgs {
    /// JSON run configuration; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub gain: Option<f64>,
    /// Total expected counts per unit exposure.
    #[arg(long)]
    pub counts: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Reconstruct from exact expected counts instead of Poisson samples.
    #[arg(long)]
    pub ideal: bool,
    #[arg(long, value_enum)]
    pub settings: Option<SettingsArg>,
    /// Iteration cap of the likelihood maximization.
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub target_fidelity: f64,
    /// Probe amplitudes `c0,c1`; rescaled to unit norm.
    #[arg(long, value_delimiter = ',')]
    pub probe: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
