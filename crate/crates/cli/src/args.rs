use std::path::PathBuf;

use aclab_core::{Interval, Point, Rat, Span};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "aclab", version, about = "Exact witnesses against generalized absolute continuity")]
pub struct Cli {
    /// Worker threads for parallel kernels.
    #[arg(long, global = true, env = "ACLAB_THREADS")]
    pub threads: Option<usize>,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the main output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Print the resolved configuration as JSON and exit without running.
    #[arg(long, global = true)]
    pub dump_config: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Tsv,
}

// Parsed once per run, so the size spread between variants does not matter.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Evaluate a function at points.
    Eval(EvalArgs),
    /// Build a witness family against a class and report the verdict.
    Refute(RefuteArgs),
    /// Exhaustive optimum over a dyadic grid.
    Oracle(OracleArgs),
    /// Build the recursive square hierarchy and export it.
    Hierarchy(HierarchyArgs),
    /// Pointwise and grid diagnostics as plottable TSV.
    Scan(ScanArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Function in the spec syntax, e.g. `preset:takagi-tent`.
    pub spec: String,
    /// A point such as `1/4,7`; repeatable.
    #[arg(long = "point", short, allow_hyphen_values = true)]
    pub points: Vec<String>,
    /// File with one point per line; `#` starts a comment.
    #[arg(long)]
    pub points_file: Option<PathBuf>,
    /// Read coordinates as `p+q*sqrt2`.
    #[arg(long)]
    pub q2: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassArgs {
    /// Class such as `1ac`, `0ac`, `strong0ac` or `alpha:1/2`; the
    /// exponent defaults to the dimension unless given as `^n`.
    #[arg(long)]
    pub class: String,
    #[arg(long)]
    pub delta: Rat,
    #[arg(long)]
    pub epsilon: Option<Rat>,
    /// Search region `a:b`; defaults to the function's natural domain.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<Interval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Auto,
    #[value(name = "analytic:strong0ac")]
    #[serde(rename = "analytic:strong0ac")]
    Strong0ac,
    #[value(name = "analytic:0ac")]
    #[serde(rename = "analytic:0ac")]
    ZeroAc,
    #[value(name = "analytic:product")]
    #[serde(rename = "analytic:product")]
    Product,
    #[value(name = "analytic:half-ac")]
    #[serde(rename = "analytic:half-ac")]
    HalfAc,
    Greedy,
    Oracle,
}

#[derive(Debug, Args, Serialize)]
pub struct RefuteArgs {
    pub spec: String,
    #[command(flatten)]
    pub class: ClassArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: Method,

    /// Witness pair `a:b` for the analytic refuters.
    #[arg(long, allow_hyphen_values = true)]
    pub pair: Option<Span>,
    /// Steepness the pair must reach; defaults to the pair's own ratio.
    #[arg(long)]
    pub ratio: Option<Rat>,

    /// Number of stacked squares.
    #[arg(long, default_value_t = 1000)]
    pub k: usize,
    /// Step in the diagonal coordinate t; defaults to d/k.
    #[arg(long)]
    pub tau: Option<Rat>,
    /// Starting t.
    #[arg(long, default_value = "0")]
    pub t: Rat,

    /// Hierarchy levels `m0:M`; defaults to 2 through the spec's depth.
    #[arg(long)]
    pub levels: Option<String>,

    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20_000)]
    pub candidates: usize,
    #[arg(long, default_value_t = 20_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 4)]
    pub rounds: usize,
    #[arg(long)]
    pub max_family: Option<usize>,
    /// Restrict greedy to the grid with `2^r` cells per side (oracle: required).
    #[arg(long)]
    pub grid: Option<u32>,
    /// Oracle family-size bound.
    #[arg(long, default_value_t = 2)]
    pub oracle_k: usize,
    /// Oracle enumeration cap.
    #[arg(long, default_value_t = aclab_core::witness::DEFAULT_ORACLE_CAP)]
    pub cap: u128,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    pub spec: String,
    #[command(flatten)]
    pub class: ClassArgs,
    /// Grid with `2^r` cells per side of the domain.
    #[arg(long)]
    pub grid: u32,
    /// Largest family size.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = aclab_core::witness::DEFAULT_ORACLE_CAP)]
    pub cap: u128,
}

#[derive(Debug, Args, Serialize)]
pub struct HierarchyArgs {
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Cap on the number of deepest-level squares.
    #[arg(long, default_value_t = aclab_core::hierarchy::DEFAULT_SQUARE_CAP)]
    pub cap: u128,
    /// Per-level statistics (the default when nothing else is asked for).
    #[arg(long)]
    pub stats: bool,
    /// Build the half-regular witness over levels `m0:M`.
    #[arg(long)]
    pub witness: Option<String>,
    /// Export every square as JSON lines to this file.
    #[arg(long)]
    pub squares: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanKind {
    Lip,
    Dirderiv,
    Energy,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    pub spec: String,
    #[arg(long, value_enum)]
    pub kind: ScanKind,
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<Point>,
    /// Direction for `dirderiv`, normalized internally.
    #[arg(long, allow_hyphen_values = true)]
    pub dir: Option<Point>,
    /// Rectangle `a:b` for `energy`.
    #[arg(long, allow_hyphen_values = true)]
    pub rect: Option<Interval>,
    /// Refinement levels for `energy`.
    #[arg(long, default_value_t = 8)]
    pub levels: usize,
    /// Radii (`lip`) or steps (`dirderiv`), comma separated, decreasing.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub schedule: Option<Vec<Rat>>,
    /// Directions per radius for `lip`.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// Growth factor that flags divergence (`lip` default 2, `energy` default 1.2).
    #[arg(long)]
    pub factor: Option<f64>,
    /// Relative tolerance for `dirderiv`.
    #[arg(long, default_value_t = aclab_core::checkers::DIR_TOL)]
    pub tol: f64,
}
