use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_SEED: u64 = 20_240_101;

#[derive(Debug, Parser)]
#[command(
    name = "bss",
    version,
    about = "Hybrid-scheme simulation of Brownian semistationary processes, error theory and rough Bergomi smiles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate BSS or TBSS trajectories.
    Simulate(SimulateArgs),
    /// Print the innovation covariance matrix and its Cholesky factor.
    Covmat(CovmatArgs),
    /// Tabulate the asymptotic MSE constant and RMSE reductions.
    Jtable(JtableArgs),
    /// Analytic MSE against the asymptotic rate over a list of resolutions.
    Mse(MseArgs),
    /// Bias of the change-of-frequency roughness estimator.
    Estimate(EstimateArgs),
    /// Monte Carlo implied volatility smile of the rough Bergomi model.
    Smile(SmileArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelName {
    Gamma,
    PowerLaw,
    ScaledPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleName {
    Forward,
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcessName {
    Bss,
    Tbss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Hybrid,
    Exact,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed, or `random` to draw one (the drawn value is reported).
    #[arg(long, default_value_t = DEFAULT_SEED.to_string())]
    pub seed: String,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file with flag settings; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value_t = KernelName::Gamma)]
    pub kernel: KernelName,
    /// Roughness index in (-1/2, 1/2), nonzero.
    #[arg(long, default_value_t = -0.43)]
    pub alpha: f64,
    /// Gamma kernel decay rate.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Power-law kernel tail exponent, below -1/2.
    #[arg(long, default_value_t = -1.0)]
    pub beta: f64,
    /// Scaled-power kernel factor (default √(2α+1)).
    #[arg(long)]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Grid resolution; the step is 1/n.
    #[arg(long, default_value_t = 50)]
    pub n: u64,
    /// Time horizon.
    #[arg(long = "T", default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1)]
    pub kappa: usize,
    #[arg(long = "b", value_enum, default_value_t = RuleName::Optimal)]
    pub b_rule: RuleName,
    #[arg(long, value_enum, default_value_t = ProcessName::Bss)]
    pub process: ProcessName,
    /// Truncation exponent: N_n = ⌊n^(1+γ)⌋.
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = MethodName::Hybrid)]
    pub method: MethodName,
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    /// Rescale BSS paths to unit stationary variance.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub normalize: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct CovmatArgs {
    #[arg(long, default_value_t = -0.43)]
    pub alpha: f64,
    #[arg(long, default_value_t = 50)]
    pub n: u64,
    #[arg(long, default_value_t = 2)]
    pub kappa: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct JtableArgs {
    /// `start:stop:step` or a comma list.
    #[arg(long, default_value = "-0.49:0.49:0.02", allow_hyphen_values = true)]
    pub alpha_grid: String,
    #[arg(long, default_value = "0,1,2,3")]
    pub kappa: String,
    /// Comma list of `forward` and `optimal`.
    #[arg(long = "b", default_value = "optimal")]
    pub b_rule: String,
    /// Number of terms of the series before the tail correction.
    #[arg(long = "N", default_value_t = 1_000_000)]
    pub terms: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct MseArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, value_enum, default_value_t = ProcessName::Bss)]
    pub process: ProcessName,
    #[arg(long, default_value_t = 1)]
    pub kappa: usize,
    #[arg(long = "b", value_enum, default_value_t = RuleName::Optimal)]
    pub b_rule: RuleName,
    /// Comma list of resolutions.
    #[arg(long, default_value = "256,512,1024,2048,4096")]
    pub ns: String,
    /// Paths for the Monte Carlo second-moment check (0 skips it).
    #[arg(long, default_value_t = 0)]
    pub reps: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Observations per path.
    #[arg(long, default_value_t = 500)]
    pub m: usize,
    /// Comma list of subsampling steps; paths have m·s steps on [0, 1].
    #[arg(long, default_value = "1,2,5")]
    pub s: String,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    /// Comma list of exact, hybrid-k1, hybrid-k2, hybrid-k3, riemann-fwd, riemann-opt.
    #[arg(long, default_value = "exact,hybrid-k1,riemann-fwd")]
    pub schemes: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct SmileArgs {
    /// Maturity.
    #[arg(long = "T", default_value_t = 1.0)]
    pub maturity: f64,
    /// Time steps.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    /// One of hybrid-k1, hybrid-k2, riemann-fwd, riemann-opt, exact.
    #[arg(long, default_value = "hybrid-k1")]
    pub scheme: String,
    /// Log-strikes as `start:stop:step` or a comma list (default depends on T).
    #[arg(long, allow_hyphen_values = true)]
    pub log_strikes: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub s0: f64,
    /// Flat forward variance (0.235²).
    #[arg(long, default_value_t = 0.055225)]
    pub xi: f64,
    #[arg(long, default_value_t = 1.9)]
    pub eta: f64,
    #[arg(long, default_value_t = -0.43)]
    pub alpha: f64,
    #[arg(long, default_value_t = -0.9)]
    pub rho: f64,
    #[command(flatten)]
    pub common: Common,
}
