use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fringelab::asymptotics::Regime;
use fringelab::{DegreeStatistic, OffspringDistribution, PlaneTree, StatFamily, WeightSequence};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "fringelab", version, about = "Fringe subtree statistics of random trees with given degrees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw uniform trees for a degree statistic, labelled trees for a
    /// degree sequence, or conditioned Galton-Watson trees.
    Sample(SampleArgs),
    /// Number of plane trees with a degree statistic, or fringe counts in one tree.
    Count(CountArgs),
    /// Exact joint factorial moments of fringe counts, or of degree counts.
    Moments(MomentsArgs),
    /// Limit constants for an offspring law or a weight sequence.
    Asymptotics(AsymptoticsArgs),
    /// Run a seeded Monte Carlo experiment from a JSON config.
    Experiment(ExperimentArgs),
    /// Factorial-moment scan against the quadratic-exponent asymptotic.
    CheckGw(CheckGwArgs),
    /// List every plane tree with a degree statistic or a size.
    Enumerate(EnumerateArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeArg {
    Auto,
    FiniteVariance,
    StableAsserted,
    SubcriticalAsserted,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Auto => Regime::Auto,
            RegimeArg::FiniteVariance => Regime::FiniteVariance,
            RegimeArg::StableAsserted => Regime::StableAsserted,
            RegimeArg::SubcriticalAsserted => Regime::SubcriticalAsserted,
        }
    }
}

/// Flags shared by every subcommand. Only `format` is echoed in the
/// resolved config.
#[derive(Debug, Args)]
pub struct Io {
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with default values; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// More detail on stderr.
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

/// Inline JSON, or a path to a file holding it.
pub fn parse_stat(s: &str) -> Result<DegreeStatistic, String> {
    if s.trim_start().starts_with('{') {
        return DegreeStatistic::from_json(s).map_err(|e| e.to_string());
    }
    let text = std::fs::read_to_string(s).map_err(|e| format!("cannot read {s}: {e}"))?;
    DegreeStatistic::from_json(&text).map_err(|e| format!("{s}: {e}"))
}

pub fn parse_law(s: &str) -> Result<OffspringDistribution, String> {
    s.parse().map_err(|e: fringelab::Error| e.to_string())
}

pub fn parse_weights(s: &str) -> Result<WeightSequence, String> {
    s.parse().map_err(|e: fringelab::Error| e.to_string())
}

/// `full_binary`, `geometric_profile`, `one_hub[:LAMBDA]`, or the JSON form.
pub fn parse_family(s: &str) -> Result<StatFamily, String> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| e.to_string());
    }
    match s.split_once(':') {
        None if s == "full_binary" => Ok(StatFamily::FullBinary),
        None if s == "geometric_profile" => Ok(StatFamily::GeometricProfile),
        None if s == "one_hub" => Ok(StatFamily::OneHub { lambda: 1.0 }),
        Some(("one_hub", l)) => l
            .parse::<f64>()
            .ok()
            .filter(|l| l.is_finite() && *l >= 0.0)
            .map(|lambda| StatFamily::OneHub { lambda })
            .ok_or_else(|| format!("bad one_hub lambda {l:?}")),
        _ => Err(format!("unknown family {s:?}; expected full_binary, geometric_profile or one_hub[:LAMBDA]")),
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub io: Io,
    #[command(flatten)]
    pub opts: SampleOpts,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleOpts {
    /// Degree statistic as JSON, e.g. '{"0":3,"2":2}', or a file holding it.
    #[arg(long, value_parser = parse_stat)]
    pub stat: Option<DegreeStatistic>,
    /// Degree sequence of labels 1..n, comma separated; draws labelled trees.
    #[arg(long, value_delimiter = ',')]
    pub dseq: Vec<u32>,
    /// Offspring law for conditioned Galton-Watson sampling (needs --n).
    #[arg(long, value_parser = parse_law)]
    pub p: Option<OffspringDistribution>,
    /// Tree size for conditioned Galton-Watson sampling.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rejection budget per conditioned draw.
    #[arg(long)]
    pub max_attempts: Option<u64>,
    #[arg(skip)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub io: Io,
    #[command(flatten)]
    pub opts: CountOpts,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountOpts {
    #[arg(long, value_parser = parse_stat)]
    pub stat: Option<DegreeStatistic>,
    /// Count fringe subtrees in this tree instead.
    #[arg(long)]
    pub tree: Option<PlaneTree>,
    /// Pattern to count in --tree; repeatable.
    #[arg(long)]
    pub pattern: Vec<PlaneTree>,
    #[arg(skip)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub io: Io,
    #[command(flatten)]
    pub opts: MomentsOpts,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsOpts {
    #[arg(long, value_parser = parse_stat)]
    pub stat: Option<DegreeStatistic>,
    /// Pattern tree in preorder degrees; repeatable.
    #[arg(long)]
    pub pattern: Vec<PlaneTree>,
    /// File with one pattern per line.
    #[arg(long)]
    pub patterns: Option<PathBuf>,
    /// Factorial moment orders, one per pattern (default 1 each).
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<u64>,
    /// Also report exact variances and the plug-in mean for each pattern.
    #[arg(long)]
    pub variance: bool,
    /// Results are always exact; the flag is accepted so scripts can say so.
    #[arg(long)]
    pub exact: bool,
    /// Weight law for degree-count moments of a conditioned tree (needs --n).
    #[arg(long, value_parser = parse_law)]
    pub w: Option<OffspringDistribution>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Degree orders as DEGREE=ORDER pairs, e.g. 0=1,2=2.
    #[arg(long, value_delimiter = ',')]
    pub degree_q: Vec<String>,
    #[arg(skip)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub io: Io,
    #[command(flatten)]
    pub opts: AsymptoticsOpts,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymptoticsOpts {
    /// Offspring law, e.g. geometric:1/2, binary, finite:0=1/2,2=1/2.
    #[arg(long, value_parser = parse_law)]
    pub p: Option<OffspringDistribution>,
    /// Weight sequence for simply generated trees, e.g. ones:64, cayley, (1,0,1).
    #[arg(long, value_parser = parse_weights)]
    pub w: Option<WeightSequence>,
    #[arg(long)]
    pub pattern: Vec<PlaneTree>,
    #[arg(long)]
    pub patterns: Option<PathBuf>,
    /// Toll function JSON file for an additive functional.
    #[arg(long)]
    pub toll: Option<PathBuf>,
    /// Highest degree in the degree covariance block (weight sequences only).
    #[arg(long)]
    pub degrees: Option<u32>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    #[arg(skip)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub io: Io,
    /// Override the sizes of the config, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write standardized samples as CSV to this file.
    #[arg(long)]
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckGwArgs {
    #[command(flatten)]
    pub io: Io,
    #[command(flatten)]
    pub opts: CheckGwOpts,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckGwOpts {
    /// Statistic family: full_binary, geometric_profile, one_hub[:LAMBDA].
    #[arg(long, value_parser = parse_family)]
    pub family: Option<StatFamily>,
    #[arg(long)]
    pub pattern: Option<PlaneTree>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<u64>,
    /// Scan q up to c·μ/σ.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(skip)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub io: Io,
    #[command(flatten)]
    pub opts: EnumerateOpts,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnumerateOpts {
    #[arg(long, value_parser = parse_stat)]
    pub stat: Option<DegreeStatistic>,
    /// Every plane tree with this many vertices.
    #[arg(long)]
    pub size: Option<u64>,
    /// Refuse to list more than this many trees.
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(skip)]
    pub format: Option<Format>,
}

impl Command {
    pub fn verbosity(&self) -> u8 {
        match self {
            Command::Sample(a) => a.io.verbose,
            Command::Count(a) => a.io.verbose,
            Command::Moments(a) => a.io.verbose,
            Command::Asymptotics(a) => a.io.verbose,
            Command::Experiment(a) => a.io.verbose,
            Command::CheckGw(a) => a.io.verbose,
            Command::Enumerate(a) => a.io.verbose,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::Count(_) => "count",
            Command::Moments(_) => "moments",
            Command::Asymptotics(_) => "asymptotics",
            Command::Experiment(_) => "experiment",
            Command::CheckGw(_) => "check-gw",
            Command::Enumerate(_) => "enumerate",
        }
    }
}
