use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "covertsim",
    version,
    about = "Covert communication analysis under channel uncertainty"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Warden's optimal threshold and error sum against his known gain.
    Threshold(CommonArgs),
    /// Warden's error sum averaged over his known gain, optionally swept over a parameter.
    AvgError(CommonArgs),
    /// Outage probability against target rate.
    Outage(CommonArgs),
    /// Boundary of the covertness-constrained rate region.
    Region(RegionArgs),
    /// Compares closed forms with Monte Carlo estimates.
    McValidate(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Threshold(_) => "threshold",
            Command::AvgError(_) => "avg-error",
            Command::Outage(_) => "outage",
            Command::Region(_) => "region",
            Command::McValidate(_) => "mc-validate",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Threshold(a) | Command::AvgError(a) | Command::Outage(a) | Command::McValidate(a) => a,
            Command::Region(a) => &a.common,
        }
    }
}

/// Options shared by every command. Each may also be given in the config file under the
/// same name without the leading dashes.
#[derive(Debug, Clone, Default, Args)]
pub struct Layer {
    #[arg(long)]
    pub p_ac: Option<f64>,
    #[arg(long)]
    pub p_ab: Option<f64>,
    /// Total power budget in dB.
    #[arg(long)]
    pub p_total_db: Option<f64>,
    #[arg(long)]
    pub d_ac: Option<f64>,
    #[arg(long)]
    pub d_ab: Option<f64>,
    #[arg(long)]
    pub d_aw: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub sigma2_c: Option<f64>,
    #[arg(long)]
    pub sigma2_b: Option<f64>,
    #[arg(long)]
    pub sigma2_w: Option<f64>,
    /// Channel uncertainty at all three receivers; the per-receiver options override it.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub beta_c: Option<f64>,
    #[arg(long)]
    pub beta_b: Option<f64>,
    #[arg(long)]
    pub beta_w: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta_c: Option<f64>,
    #[arg(long)]
    pub delta_b: Option<f64>,
    /// NAME:lin|log:MIN:MAX:COUNT
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Channel uses per block; omit for the large-block limit.
    #[arg(long)]
    pub n_uses: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to $COVERTSIM_WORKERS, then 1.
    #[arg(long)]
    pub workers: Option<usize>,
    /// CSV destination, `-` for standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub g_hat_max: Option<f64>,
    #[arg(long)]
    pub receiver: Option<String>,
    #[arg(long)]
    pub hypothesis: Option<String>,
    #[arg(long)]
    pub rate_max: Option<f64>,
    #[arg(long)]
    pub grid_size: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat `key = value` file with the same keys as the options.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub layer: Layer,
}

#[derive(Debug, Clone, Args)]
pub struct RegionArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Emit the no-covertness baseline instead of the covert region.
    #[arg(long)]
    pub baseline: bool,
}
