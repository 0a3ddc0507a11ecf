use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lmn_core::decoder::MatchMode;
use lmn_core::montecarlo::parse_grid;
use lmn_core::LatticeKind;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "lmn", version, about = "Bit-flip correction on lattice entanglement networks")]
pub struct Cli {
    /// Master seed. Falls back to LMN_SEED, then to a fixed default.
    #[arg(long, global = true, env = "LMN_SEED")]
    pub seed: Option<u64>,

    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Also write a run manifest here (needed when the output goes to stdout).
    #[arg(long, global = true)]
    pub manifest_out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Estimate P_N(eps) on a grid of sizes and error rates.
    Sweep(SweepArgs),
    /// Locate the crossing of the P_N curves and fit the small-eps law.
    Threshold(ThresholdArgs),
    /// Extrapolate P_N to the large-size limit and write a P_inf table.
    Extrapolate(ExtrapolateArgs),
    /// Plan repetition-code size and tolerable error for target entanglement.
    Resources(ResourcesArgs),
    /// Physical error budget of the local operations.
    Budget(BudgetArgs),
    /// Compare the decoding protocol with bond percolation on pure links.
    Percolation(PercolationArgs),
    /// Decode a single instance and print every intermediate step.
    DecodeOne(DecodeOneArgs),
    /// Re-run a manifest and check that the outputs are byte-identical.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sweep(_) => "sweep",
            Command::Threshold(_) => "threshold",
            Command::Extrapolate(_) => "extrapolate",
            Command::Resources(_) => "resources",
            Command::Budget(_) => "budget",
            Command::Percolation(_) => "percolation",
            Command::DecodeOne(_) => "decode-one",
            Command::Replay(_) => "replay",
        }
    }

    pub fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::Sweep(a) => a.out.as_ref(),
            Command::Threshold(a) => a.out.as_ref(),
            Command::Extrapolate(a) => a.out.as_ref(),
            Command::Resources(a) => a.out.as_ref(),
            Command::Budget(a) => a.out.as_ref(),
            Command::Percolation(a) => a.out.as_ref(),
            Command::DecodeOne(a) => a.out.as_ref(),
            Command::Replay(_) => None,
        }
    }

    pub fn set_out(&mut self, path: Option<PathBuf>) {
        let slot = match self {
            Command::Sweep(a) => &mut a.out,
            Command::Threshold(a) => &mut a.out,
            Command::Extrapolate(a) => &mut a.out,
            Command::Resources(a) => &mut a.out,
            Command::Budget(a) => &mut a.out,
            Command::Percolation(a) => &mut a.out,
            Command::DecodeOne(a) => &mut a.out,
            Command::Replay(_) => return,
        };
        *slot = path;
    }

    /// Files read by the command, for the manifest.
    pub fn inputs(&self) -> Vec<PathBuf> {
        match self {
            Command::Threshold(a) => a.input.iter().chain(&a.small_eps).cloned().collect(),
            Command::Extrapolate(a) => a.input.clone(),
            Command::Resources(a) if PinfSource::parse(&a.pinf).is_file() => vec![PathBuf::from(&a.pinf)],
            _ => Vec::new(),
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GridArgs {
    #[arg(long)]
    pub lattice: LatticeKind,
    /// Comma-separated lattice sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Error rates as `start:stop:step` or a comma list.
    #[arg(long, value_parser = grid_arg)]
    pub eps: String,
    /// Extra grid merged into `--eps`, typically dense near the threshold.
    #[arg(long, value_parser = grid_arg)]
    pub refine: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// `exact` or `pruned:K`.
    #[arg(long, default_value = "exact", value_parser = mode_arg)]
    pub mode: String,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdArgs {
    /// Sweep CSV files holding the crossing region.
    #[arg(long = "in")]
    pub input: Vec<PathBuf>,
    /// Additional sweep CSVs used only for the small-eps fit.
    #[arg(long)]
    pub small_eps: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.04)]
    pub fit_eps_max: f64,
    /// Run the sweep inline instead of reading `--in`.
    #[arg(long)]
    pub lattice: Option<LatticeKind>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long, value_parser = grid_arg)]
    pub eps: Option<String>,
    #[arg(long, value_parser = grid_arg)]
    pub refine: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value = "exact", value_parser = mode_arg)]
    pub mode: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ExtrapolateArgs {
    #[arg(long = "in", required = true)]
    pub input: Vec<PathBuf>,
    /// Knots up to this error rate fix the quadratic used below the table.
    #[arg(long, default_value_t = 0.04)]
    pub fit_eps_max: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ResourcesArgs {
    #[arg(long = "E", value_delimiter = ',', required = true)]
    pub e: Vec<f64>,
    #[arg(long = "N", value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// A P_inf table written by `extrapolate`, or `quadratic:C`.
    #[arg(long)]
    pub pinf: String,
    #[arg(long, default_value_t = lmn_core::encoder::DEFAULT_T_MAX)]
    pub t_max: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct BudgetArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub delta: f64,
    /// Memory error per round. Derived from `--gamma` and `--t0` when both are given.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, default_value_t = 3)]
    pub m: u32,
    #[arg(long, requires = "t0")]
    pub gamma: Option<f64>,
    #[arg(long, requires = "gamma")]
    pub t0: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PercolationArgs {
    /// Decoding threshold on the flip rate.
    #[arg(long, default_value_t = 0.11)]
    pub eps_star: f64,
    /// `N,p,trials`: estimate the left-right crossing probability.
    #[arg(long, value_parser = simulate_arg)]
    pub simulate: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct DecodeOneArgs {
    #[arg(long)]
    pub lattice: LatticeKind,
    #[arg(long = "N")]
    pub n: usize,
    /// Sample the errors at this rate (with the global seed).
    #[arg(long, conflicts_with = "errors")]
    pub eps: Option<f64>,
    /// Trial index within the `(lattice, N, eps, seed)` stream.
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    /// Explicit error edges as a comma list (may be empty).
    #[arg(long, value_parser = edge_list_arg)]
    pub errors: Option<String>,
    #[arg(long, default_value = "exact", value_parser = mode_arg)]
    pub mode: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where replayed outputs are written. Required when the original run wrote files.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn grid_arg(text: &str) -> Result<String, String> {
    parse_grid(text).map_err(|e| e.to_string())?;
    Ok(text.to_string())
}

fn mode_arg(text: &str) -> Result<String, String> {
    parse_mode(text)?;
    Ok(text.to_string())
}

fn edge_list_arg(text: &str) -> Result<String, String> {
    parse_edge_list(text)?;
    Ok(text.to_string())
}

pub fn parse_edge_list(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| format!("`{t}` is not an edge index")))
        .collect()
}

fn simulate_arg(text: &str) -> Result<String, String> {
    parse_simulate(text)?;
    Ok(text.to_string())
}

pub fn parse_mode(text: &str) -> Result<MatchMode, String> {
    if text == "exact" {
        return Ok(MatchMode::Exact);
    }
    match text.strip_prefix("pruned:").map(str::parse::<usize>) {
        Some(Ok(k)) if k > 0 => Ok(MatchMode::Pruned { k }),
        _ => Err(format!("expected `exact` or `pruned:K`, got `{text}`")),
    }
}

pub fn parse_simulate(text: &str) -> Result<(usize, f64, usize), String> {
    let bad = || format!("expected `N,p,trials`, got `{text}`");
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [n, p, trials] = parts.as_slice() else {
        return Err(bad());
    };
    let n: usize = n.parse().map_err(|_| bad())?;
    let p: f64 = p.parse().map_err(|_| bad())?;
    let trials: usize = trials.parse().map_err(|_| bad())?;
    if n < 2 || !(0.0..=1.0).contains(&p) || trials == 0 {
        return Err(bad());
    }
    Ok((n, p, trials))
}

pub enum PinfSource {
    Quadratic(f64),
    File(PathBuf),
}

impl PinfSource {
    pub fn parse(text: &str) -> PinfSource {
        match text.strip_prefix("quadratic:").and_then(|c| c.parse().ok()) {
            Some(c) => PinfSource::Quadratic(c),
            None => PinfSource::File(PathBuf::from(text)),
        }
    }

    fn is_file(&self) -> bool {
        matches!(self, PinfSource::File(_))
    }
}
