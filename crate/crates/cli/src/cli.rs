//! Argument definitions and shared parsing helpers.
//!
//! Exit codes: 0 success, 2 parse/config/input error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use adavol_core::{GarchParams, MeanRecursion, ModelOrder};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "adavol", version, about = "Streaming GARCH volatility estimation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Simulate GARCH observation/variance paths and write them as CSV
    Simulate(SimulateArgs),
    /// Estimate a model on one series (streaming or batch) and export the
    /// parameter trajectory and variance predictions
    Fit(FitArgs),
    /// Monte Carlo comparison of the streaming estimator against the
    /// rolling batch baseline, with accuracy-score aggregates
    Compare(CompareArgs),
    /// Relative speed comparison: one streaming pass vs. a batch re-fit on
    /// every growing prefix
    Bench(BenchArgs),
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl std::error::Error for CliError {}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Numeric(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Numeric(_) => ExitCode::from(3),
        }
    }
}

impl From<adavol_core::Error> for CliError {
    fn from(e: adavol_core::Error) -> Self {
        use adavol_core::Error::*;
        match e {
            StationarityViolation { .. }
            | NonNegativityViolation { .. }
            | NonPositiveVariance { .. }
            | ModeMismatch { .. }
            | NonFiniteInput { .. }
            | NonPositiveTruth { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult = Result<ExitCode, CliError>;

/// Model order as "p,q".
pub fn parse_order(s: &str) -> Result<ModelOrder, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected 'p,q', got '{s}'"));
    }
    let p = parts[0].trim().parse().map_err(|e| format!("bad p: {e}"))?;
    let q = parts[1].trim().parse().map_err(|e| format!("bad q: {e}"))?;
    ModelOrder::new(p, q).map_err(|e| e.to_string())
}

/// Either the word `random` or a fixed comma-separated vector.
#[derive(Debug, Clone)]
pub enum VectorPolicy {
    Random,
    Fixed(Vec<f64>),
}

pub fn parse_vector_policy(s: &str) -> Result<VectorPolicy, String> {
    if s.eq_ignore_ascii_case("random") {
        return Ok(VectorPolicy::Random);
    }
    let v: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if !v.is_empty() => Ok(VectorPolicy::Fixed(v)),
        Ok(_) => Err("empty vector".into()),
        Err(e) => Err(format!("bad vector '{s}': {e}")),
    }
}

impl VectorPolicy {
    /// Resolve to a full parameter vector for the given order; fixed vectors
    /// must carry omega (length p + q + 1).
    pub fn resolve_full(&self, order: ModelOrder, seed: u64) -> Result<GarchParams, CliError> {
        match self {
            VectorPolicy::Random => Ok(adavol_core::random_params(order, seed)),
            VectorPolicy::Fixed(v) => {
                if v.len() != order.dim_full() {
                    return Err(CliError::Config(format!(
                        "expected {} components (omega, alpha_1..{}, beta_1..{}), got {}",
                        order.dim_full(),
                        order.p,
                        order.q,
                        v.len()
                    )));
                }
                Ok(GarchParams::new(
                    v[0],
                    v[1..1 + order.p].to_vec(),
                    v[1 + order.p..].to_vec(),
                ))
            }
        }
    }

    /// Resolve to a streaming start vector (alpha, beta). Fixed vectors may
    /// be given with or without omega; a leading omega is dropped.
    pub fn resolve_vte(&self, order: ModelOrder, seed: u64) -> Result<Vec<f64>, CliError> {
        match self {
            VectorPolicy::Random => {
                let p = adavol_core::random_params(order, seed);
                let mut v = p.alpha;
                v.extend(p.beta);
                Ok(v)
            }
            VectorPolicy::Fixed(v) => {
                if v.len() == order.dim_vte() {
                    Ok(v.clone())
                } else if v.len() == order.dim_full() {
                    Ok(v[1..].to_vec())
                } else {
                    Err(CliError::Config(format!(
                        "expected {} or {} components, got {}",
                        order.dim_vte(),
                        order.dim_full(),
                        v.len()
                    )))
                }
            }
        }
    }
}

/// Parsed quantile grid (clap needs a scalar target type for a
/// whole-vector value parser).
#[derive(Debug, Clone)]
pub struct AlphaGrid(pub Vec<f64>);

/// Quantile grid: "lo:hi:step" or an explicit comma list.
pub fn parse_alphas(s: &str) -> Result<AlphaGrid, String> {
    let grid = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected 'lo:hi:step', got '{s}'"));
        }
        let lo: f64 = parts[0].trim().parse().map_err(|e| format!("bad lo: {e}"))?;
        let hi: f64 = parts[1].trim().parse().map_err(|e| format!("bad hi: {e}"))?;
        let step: f64 = parts[2].trim().parse().map_err(|e| format!("bad step: {e}"))?;
        if !(step > 0.0) {
            return Err("step must be > 0".into());
        }
        adavol_core::alpha_grid(lo, hi, step)
    } else {
        let v: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
        v.map_err(|e| format!("bad quantile list '{s}': {e}"))?
    };
    if grid.is_empty() || grid.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
        return Err("quantile levels must lie strictly inside (0, 1)".into());
    }
    Ok(AlphaGrid(grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    /// CSV with a numeric observation column
    Returns,
    /// CSV of dated closing prices; log-returns are taken first
    Prices,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Adavol,
    Batch,
}

fn parse_mean_recursion(s: &str) -> Result<MeanRecursion, String> {
    s.parse().map_err(|e: adavol_core::Error| e.to_string())
}

#[derive(Args, Debug)]
pub struct CommonOut {
    /// Output directory
    #[arg(long, env = "ADAVOL_OUT", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Model order "p,q"
    #[arg(long, value_parser = parse_order, default_value = "1,1")]
    pub order: ModelOrder,
    /// Observations per run
    #[arg(long, default_value_t = 20_000)]
    pub n: usize,
    /// Number of simulated paths
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    /// Base seed; run i uses a sub-seed derived from (seed, i)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// True parameters: "omega,alpha..,beta.." or "random"
    #[arg(long, value_parser = parse_vector_policy, default_value = "random")]
    pub theta0: VectorPolicy,
    /// Discarded leading steps per path
    #[arg(long, default_value_t = 1000)]
    pub burn_in: usize,
    #[command(flatten)]
    pub out: CommonOut,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Input CSV path
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputKind::Returns)]
    pub format: InputKind,
    /// Observation column (returns format)
    #[arg(long, default_value = "x")]
    pub column: String,
    /// Date column (prices format)
    #[arg(long, default_value = "date")]
    pub date_column: String,
    /// Close column (prices format)
    #[arg(long, default_value = "close")]
    pub close_column: String,
    /// Field delimiter
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    #[arg(long, value_enum, default_value_t = Method::Adavol)]
    pub method: Method,
    #[arg(long, value_parser = parse_order, default_value = "1,1")]
    pub order: ModelOrder,
    /// Start vector: fixed components or "random"
    #[arg(long, value_parser = parse_vector_policy, default_value = "random")]
    pub init: VectorPolicy,
    /// Seed for a random start vector
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// AdaGrad learning rate
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// AdaGrad stabilizer
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    /// Feasible-set strictness gap
    #[arg(long, default_value_t = 1e-6)]
    pub margin: f64,
    /// Streaming mean/variance recursion: standard or paper
    #[arg(long, value_parser = parse_mean_recursion, default_value = "standard")]
    pub mean_recursion: MeanRecursion,
    /// Observations per AdaGrad step
    #[arg(long, default_value_t = 1)]
    pub minibatch: usize,
    /// Batch baseline refit increment
    #[arg(long, default_value_t = 2000)]
    pub increment: usize,
    /// Restart every batch refit from the supplied start vector instead of
    /// the previous block's estimate
    #[arg(long, default_value_t = false)]
    pub cold_start: bool,
    /// Quantile grid for the summary score: "lo:hi:step" or a comma list
    #[arg(long, value_parser = parse_alphas, default_value = "0.01:0.99:0.01")]
    pub alphas: AlphaGrid,
    #[command(flatten)]
    pub out: CommonOut,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long, value_parser = parse_order, default_value = "1,1")]
    pub order: ModelOrder,
    #[arg(long, default_value_t = 20_000)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// True parameters per run: fixed vector or "random"
    #[arg(long, value_parser = parse_vector_policy, default_value = "random")]
    pub theta0: VectorPolicy,
    /// Shared start vector per run: fixed vector or "random"
    #[arg(long, value_parser = parse_vector_policy, default_value = "random")]
    pub init: VectorPolicy,
    #[arg(long, default_value_t = 1000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub margin: f64,
    #[arg(long, value_parser = parse_mean_recursion, default_value = "standard")]
    pub mean_recursion: MeanRecursion,
    #[arg(long, default_value_t = 1)]
    pub minibatch: usize,
    #[arg(long, default_value_t = 2000)]
    pub increment: usize,
    /// Restart every batch refit from the run's start vector
    #[arg(long, default_value_t = false)]
    pub cold_start: bool,
    #[arg(long, value_parser = parse_alphas, default_value = "0.01:0.99:0.01")]
    pub alphas: AlphaGrid,
    /// Metrics kept in the aggregate report
    #[arg(long, value_delimiter = ',', default_values_t = ["mpe".to_string(), "mape".to_string(), "mae".to_string(), "qs".to_string()])]
    pub metrics: Vec<String>,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub out: CommonOut,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Semicolon-separated model orders, e.g. "1,0;1,1;2,2"
    #[arg(long, default_value = "1,0;1,1;2,2")]
    pub orders: String,
    /// Comma-separated sample sizes
    #[arg(long, value_delimiter = ',', default_values_t = [1000usize, 2000])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: CommonOut,
}

/// Deterministic sub-seed stream: splitmix-style mix of (base, a, b).
pub fn mix_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
