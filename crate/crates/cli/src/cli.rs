//! Command-line surface. Every value flag is optional at this layer;
//! requiredness, defaults, and config-file fallback are resolved per
//! subcommand so that flags always override file values.
//!
//! Common conventions:
//! - `--config FILE` reads `key = value` fallback values (keys are the
//!   long flag names; `-` and `_` interchangeable; `#` comments).
//! - `--out FILE` writes the result there instead of standard output.
//!   Relative output paths land in `$RELAYKEY_OUT_DIR` when that is set.
//! - Sources and channels are generator specs (`dsbs:0.1`, `identity:2`,
//!   `bsc:0.05`, `constant:2x2`, `forward-y:2x2`, `joint:2x2`, `dsbsz:0.25`)
//!   or paths to table files.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Secret-key rates for two users exchanging messages through a relay:
/// region evaluation, key-rate optimization, closed-form jointly Gaussian
/// rates, and finite-blocklength protocol runs.
#[derive(Parser, Debug)]
#[command(name = "relaykey", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Evaluate a rate-region point or optimize the key rate under caps
    Region(RegionArgs),
    /// Closed-form rates for the jointly Gaussian source
    Gaussian(GaussianArgs),
    /// Monte Carlo run of the finite-blocklength protocol
    Simulate(SimArgs),
    /// Exhaustive analysis of the protocol over every source sequence
    Exact(SimArgs),
    /// Two-user key rate against one-way alternatives, one CSV row
    Compare(CompareArgs),
    /// Built-in consistency checks
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
pub struct RegionArgs {
    /// What to do: `point` (evaluate at given channels) or `optimize`
    #[arg(long)]
    pub task: Option<String>,
    /// Which bound: `inner`, `outer`, `common`, `trusted`, `trusted-reduced`
    #[arg(long)]
    pub bound: Option<String>,
    /// Source distribution (generator spec or table file)
    #[arg(long)]
    pub source: Option<String>,
    /// Single channel: relay observation (trusted) or joint-output channel (outer)
    #[arg(long)]
    pub ch: Option<String>,
    /// First user's description channel
    #[arg(long)]
    pub ch1: Option<String>,
    /// Second user's description channel
    #[arg(long)]
    pub ch2: Option<String>,
    /// Cap on the first description rate (optimize only; unbounded if absent)
    #[arg(long)]
    pub r1: Option<f64>,
    /// Cap on the second description rate (optimize only)
    #[arg(long)]
    pub r2: Option<f64>,
    /// Cap on the broadcast rate (optimize only)
    #[arg(long)]
    pub rc: Option<f64>,
    /// Number of random restarts of the search
    #[arg(long)]
    pub restarts: Option<u32>,
    /// Iteration budget per restart
    #[arg(long)]
    pub max_iters: Option<u32>,
    /// Stop a restart when the objective improves less than this
    #[arg(long)]
    pub convergence_tol: Option<f64>,
    /// Line-search grid resolution inside the optimizer
    #[arg(long)]
    pub grid_resolution: Option<u32>,
    /// Seed for the optimizer's restarts
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write a per-restart best-value CSV to this path (optimize only)
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Read fallback values from this `key = value` file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the result here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GaussianArgs {
    /// What to emit: `point`, `alpha` (time-sharing sweep), `beta` (rate-tying sweep)
    #[arg(long)]
    pub mode: Option<String>,
    /// Source correlation coefficient in [0, 1]
    #[arg(long)]
    pub rho: Option<f64>,
    /// Quantization noise variance of user 1 (point mode)
    #[arg(long)]
    pub nq1: Option<f64>,
    /// Quantization noise variance of user 2 (point mode)
    #[arg(long)]
    pub nq2: Option<f64>,
    /// First description rate in bits (alpha mode)
    #[arg(long)]
    pub r1: Option<f64>,
    /// Second description rate in bits (alpha mode)
    #[arg(long)]
    pub r2: Option<f64>,
    /// Broadcast rate in bits (alpha and beta modes)
    #[arg(long)]
    pub rc: Option<f64>,
    /// Number of sweep samples including both endpoints
    #[arg(long)]
    pub points: Option<u32>,
    /// Read fallback values from this `key = value` file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the result here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimArgs {
    /// Relay model: `untrusted`, `common`, or `trusted`
    #[arg(long)]
    pub mode: Option<String>,
    /// Blocklength (symbols per trial)
    #[arg(long)]
    pub n: Option<usize>,
    /// Source distribution: two variables (x, y), three (x, y, z) for `common`
    #[arg(long)]
    pub source: Option<String>,
    /// Relay observation channel (x, y) -> v (`trusted` mode)
    #[arg(long)]
    pub ch: Option<String>,
    /// First user's description channel
    #[arg(long)]
    pub ch1: Option<String>,
    /// Second user's description channel
    #[arg(long)]
    pub ch2: Option<String>,
    /// Typicality tolerance (relative cell-count slack)
    #[arg(long)]
    pub eps: Option<f64>,
    /// Rate slack subtracted from the planned rates
    #[arg(long)]
    pub slack: Option<f64>,
    /// Override the binning rate (bits per symbol)
    #[arg(long)]
    pub rb: Option<f64>,
    /// Override user 1's key-index rate (give with --rk2)
    #[arg(long)]
    pub rk1: Option<f64>,
    /// Override user 2's key-index rate (give with --rk1)
    #[arg(long)]
    pub rk2: Option<f64>,
    /// Override the shared-component key rate (`common` mode)
    #[arg(long)]
    pub rkz: Option<f64>,
    /// Monte Carlo trials (`simulate` only)
    #[arg(long)]
    pub trials: Option<u64>,
    /// Seed every codebook and trial derives from
    #[arg(long)]
    pub master_seed: Option<u64>,
    /// Refuse codebooks that would store more symbols than this
    #[arg(long)]
    pub codebook_cap: Option<u64>,
    /// Refuse exhaustive runs that would enumerate more tuples than this
    #[arg(long)]
    pub enum_cap: Option<u64>,
    /// Also write the generated codebook as text to this path
    #[arg(long)]
    pub dump_codebook: Option<PathBuf>,
    /// Read fallback values from this `key = value` file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the result here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Source correlation coefficient in [0, 1)
    #[arg(long)]
    pub rho: Option<f64>,
    /// First description rate in bits
    #[arg(long)]
    pub r1: Option<f64>,
    /// Second description rate in bits
    #[arg(long)]
    pub r2: Option<f64>,
    /// Broadcast rate in bits
    #[arg(long)]
    pub rc: Option<f64>,
    /// Read fallback values from this `key = value` file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the result here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Read fallback values from this `key = value` file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the check transcript here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}
