//! `noflab` experiment runner.
//!
//! Every verification pipeline of `noflab-core` is a subcommand. A run
//! produces one [`Report`]; identical command lines give byte-identical
//! reports unless `--timing` is set.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub mod experiments;
pub mod report;

pub use report::{emit_report, render, Check, ExperimentConfig, Format, Report, Table};

/// Exit status for a run whose checks all passed.
pub const EXIT_PASS: i32 = 0;
/// Exit status when an asserted check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Exit status for usage errors and invalid parameters.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "noflab",
    version,
    about = "Exact and Monte Carlo checks for one-way number-on-forehead communication",
    after_help = "Exit status: 0 all checks passed, 1 a check failed, 2 usage error or invalid parameters.\n\
                  NOFLAB_THREADS caps the worker thread count."
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed for every random choice in the run
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Add wall-clock runtime to the report (breaks byte-identical reruns)
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// One-way two-party cost of a base function, optionally verifying the lifted protocol
    Occ(OccArgs),
    /// Exhaustive search for the cheapest one-way NOF protocol of a lifted function
    NofSearch(SearchArgs),
    /// Run a built-in or loaded protocol against its target
    Simulate(SimulateArgs),
    /// GIP value probabilities on seeded cylinder intersections
    Disperser(DisperserArgs),
    /// Character-sum chain inequality on seeded cylinder intersections
    Chain(ChainArgs),
    /// Common-neighbour largeness on random or imported bipartite graphs
    Largeness(LargenessArgs),
    /// Far-apart pairs with many common neighbours on hypercube graphs
    Hd(HdArgs),
    /// Density increments and support extraction on seeded rectangles
    Density(DensityArgs),
    /// Separation witnesses against cheap three-party disjointness protocols
    Disj3Attack(AttackArgs),
    /// Parameters and evaluation of the mod-2 function G
    Cor35(Cor35Args),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Occ(_) => "occ",
            Command::NofSearch(_) => "nof-search",
            Command::Simulate(_) => "simulate",
            Command::Disperser(_) => "disperser",
            Command::Chain(_) => "chain",
            Command::Largeness(_) => "largeness",
            Command::Hd(_) => "hd",
            Command::Density(_) => "density",
            Command::Disj3Attack(_) => "disj3-attack",
            Command::Cor35(_) => "cor35",
        }
    }

    fn params(&self) -> serde_json::Value {
        let v = match self {
            Command::Occ(a) => serde_json::to_value(a),
            Command::NofSearch(a) => serde_json::to_value(a),
            Command::Simulate(a) => serde_json::to_value(a),
            Command::Disperser(a) => serde_json::to_value(a),
            Command::Chain(a) => serde_json::to_value(a),
            Command::Largeness(a) => serde_json::to_value(a),
            Command::Hd(a) => serde_json::to_value(a),
            Command::Density(a) => serde_json::to_value(a),
            Command::Disj3Attack(a) => serde_json::to_value(a),
            Command::Cor35(a) => serde_json::to_value(a),
        };
        v.expect("arguments serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FnKind {
    Eq,
    Ind,
    Disj2,
    File,
}

/// Base two-party function.
#[derive(Debug, Clone, Args, Serialize)]
pub struct FnSpec {
    #[arg(long = "fn", value_enum, default_value_t = FnKind::Eq)]
    #[serde(rename = "fn")]
    pub kind: FnKind,
    /// Field size, also the matrix size for eq and ind
    #[arg(long)]
    pub q: Option<u64>,
    /// Universe size for disj2 (matrix side 2^n)
    #[arg(long)]
    pub n: Option<u32>,
    /// CSV matrix for --fn file
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OccArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub f: FnSpec,
    /// Gadget length; with --k, also verifies the lifted upper-bound protocol
    #[arg(long, requires = "k")]
    pub r: Option<u32>,
    #[arg(long, requires = "r")]
    pub k: Option<u32>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SearchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub f: FnSpec,
    #[arg(long, default_value_t = 1)]
    pub r: u32,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Largest total cost searched
    #[arg(long, default_value_t = 4)]
    pub budget: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    LiftUpper,
    EqRand,
    IndTwoRound,
    /// Load a protocol from --protocol-file
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub protocol: ProtocolKind,
    #[command(flatten)]
    #[serde(flatten)]
    pub f: FnSpec,
    #[arg(long, default_value_t = 1)]
    pub r: u32,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Parity repetitions for eq-rand
    #[arg(long, default_value_t = 6)]
    pub t: u32,
    /// Monte Carlo samples per instance class for randomized protocols
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocol_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    /// Exact when the product space has at most 2^22 points
    Auto,
    Exact,
    Mc,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DisperserArgs {
    #[arg(long, default_value_t = 17)]
    pub q: u64,
    #[arg(long, default_value_t = 8)]
    pub r: u32,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long, default_value_t = 20)]
    pub sets: u32,
    /// Accepted samples per set in Monte Carlo mode
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0.07)]
    pub density_min: f64,
    #[arg(long, default_value_t = 0.6)]
    pub density_max: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 5)]
    pub q: u64,
    #[arg(long, default_value_t = 3)]
    pub r: u32,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long, default_value_t = 50)]
    pub sets: u32,
    #[arg(long, default_value_t = 0.05)]
    pub density_min: f64,
    #[arg(long, default_value_t = 0.95)]
    pub density_max: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LargenessArgs {
    /// Random graphs satisfying the edge-count premise
    #[arg(long, default_value_t = 100)]
    pub graphs: u32,
    #[arg(long, default_value_t = 64)]
    pub left_max: usize,
    #[arg(long, default_value_t = 64)]
    pub right_max: usize,
    /// Check one graph from an edge-list CSV (`left,right` per line) instead
    #[arg(long, requires_all = ["left", "right"])]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HdArgs {
    #[arg(long, default_value_t = 12)]
    pub n: u32,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 50)]
    pub graphs: u32,
    #[arg(long, default_value_t = 16)]
    pub right_min: usize,
    #[arg(long, default_value_t = 64)]
    pub right_max: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DensityArgs {
    #[arg(long, default_value_t = 200)]
    pub rects: u32,
    #[arg(long, default_value_t = 12)]
    pub max_n: usize,
    /// Largest deficiency accepted when drawing rectangles
    #[arg(long, default_value_t = 3.0)]
    pub max_c: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AttackArgs {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Cor35Args {
    #[arg(long, default_value_t = 48)]
    pub n: u64,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Random inputs on which G is compared with GIP mod 2
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
}

/// Runs the selected pipeline and assembles its report.
pub fn run_experiment(cli: &Cli) -> anyhow::Result<Report> {
    let start = Instant::now();
    let seed = cli.common.seed;
    let out = match &cli.command {
        Command::Occ(a) => experiments::occ(a)?,
        Command::NofSearch(a) => experiments::nof_search(a)?,
        Command::Simulate(a) => experiments::simulate(a, seed)?,
        Command::Disperser(a) => experiments::disperser(a, seed)?,
        Command::Chain(a) => experiments::chain(a, seed)?,
        Command::Largeness(a) => experiments::largeness(a, seed)?,
        Command::Hd(a) => experiments::hd(a, seed)?,
        Command::Density(a) => experiments::density(a, seed)?,
        Command::Disj3Attack(a) => experiments::disj3_attack(a)?,
        Command::Cor35(a) => experiments::cor35(a, seed)?,
    };
    let name = cli.command.name().to_string();
    Ok(Report {
        schema_version: report::SCHEMA_VERSION,
        experiment: name.clone(),
        config: ExperimentConfig {
            experiment: name,
            seed,
            format: cli.common.format,
            output: cli.common.output.as_ref().map(|p| p.display().to_string()),
            params: cli.command.params(),
        },
        passed: out.checks.iter().all(|c| c.passed),
        checks: out.checks,
        results: out.results,
        table: out.table,
        runtime_ms: cli.common.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

/// Parses `args` (program name first) and runs the experiment.
pub fn run_args<I, T>(args: I) -> anyhow::Result<Report>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_experiment(&Cli::try_parse_from(args)?)
}
