use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Exact optimal transport and curvature checks on finite metric measure spaces.
#[derive(Debug, Parser)]
#[command(name = "wasserlim", version)]
pub struct Cli {
    /// JSON object of flag defaults (keys are flag names); explicit flags win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Print diagnostics to stderr; repeat for more
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a space file describes a finite metric
    Validate(ValidateArgs),
    /// Exact p-Wasserstein distance and an optimal coupling
    Transport(TransportArgs),
    /// Displacement interpolation between two measures on a graph metric
    Geodesic(GeodesicArgs),
    /// Witnessed CD(K, infinity) curvature from seeded midpoint tests
    Cd(CdArgs),
    /// A derived quantity along a directory of instances, with a stabilisation verdict
    Sequence(SequenceArgs),
    /// The escaping-mass family: W2 stays 1 while TV tends to 0
    Counterexample(CounterexampleArgs),
    /// Uniform Dirac-cloud approximation of a measure
    Quantize(QuantizeArgs),
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ValidateArgs {
    /// Space file (metric matrix or edge list)
    #[arg(long, value_name = "FILE")]
    pub space: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct TransportArgs {
    /// Source measure file
    #[arg(long, value_name = "FILE")]
    pub mu: Option<PathBuf>,
    /// Target measure file
    #[arg(long, value_name = "FILE")]
    pub nu: Option<PathBuf>,
    /// Transport exponent, at least 1 [default: 2]
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Write the optimal coupling as JSON
    #[arg(long, value_name = "FILE")]
    pub coupling: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct GeodesicArgs {
    /// Measure at time 0
    #[arg(long, value_name = "FILE")]
    pub mu0: Option<PathBuf>,
    /// Measure at time 1
    #[arg(long, value_name = "FILE")]
    pub mu1: Option<PathBuf>,
    /// Comma-separated times in [0, 1], including 0 and 1 [default: 0,0.25,0.5,0.75,1]
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub grid: Option<Vec<f64>>,
    /// Write the interpolated measures as JSON
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct CdArgs {
    /// Reference measure file
    #[arg(long, value_name = "FILE")]
    pub lambda: Option<PathBuf>,
    /// Number of seeded test pairs [default: 50]
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Pair generator seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Curvature at which per-pair slacks are reported [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub k_hint: Option<f64>,
    /// Absolute tolerance on entropy comparisons [default: 1e-7]
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Write the full report as JSON
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    /// W1(mu, nu)
    W1,
    /// W2(mu, nu)
    W2,
    /// W_p(mu, nu) with the exponent from --p
    Wp,
    /// Total variation TV(mu, nu)
    Tv,
    /// Witnessed curvature of lambda
    K,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct SequenceArgs {
    /// Directory of instance files, taken in lexical order of file names
    #[arg(long, value_name = "DIR")]
    pub dir: Option<PathBuf>,
    /// Quantity computed at every index
    #[arg(long, value_enum)]
    pub quantity: Option<Quantity>,
    /// Transport exponent for wp; must agree with w1 or w2 if given [default: 2]
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Stabilisation tolerance [default: 1e-3]
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Pairs per index for quantity k [default: 50]
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Pair generator seed for quantity k [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write index,label,value rows
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Write the verdict as JSON
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Write a value-against-index chart
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct CounterexampleArgs {
    /// Comma-separated positive integers N [default: 4,16,256,65536]
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u64>>,
    /// Stabilisation tolerance for the verdicts [default: 1e-9]
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Write N,w2,tv rows
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Write both verdicts as JSON
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Write a chart of w2 and tv against index
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct QuantizeArgs {
    /// Measure file
    #[arg(long, value_name = "FILE")]
    pub mu: Option<PathBuf>,
    /// Target accuracy in W_p, positive
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Transport exponent, at least 1 [default: 2]
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Write the cloud as JSON
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
