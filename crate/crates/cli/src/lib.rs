//! Experiment harness behind the `qwalk` binary.
//!
//! Every command writes its CSV tables and a `<name>_summary.json` into
//! the output directory. CSV content depends only on the arguments and the
//! seed; the wall time lives in the summary alone.

pub mod commands;
pub mod lists;
mod output;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qwalk_core::analysis::Model;
use qwalk_core::graph::Family;

pub use output::Summary;

pub const DEFAULT_SEED: u64 = 20_100_601;

#[derive(Parser, Debug, Clone, Serialize)]
#[command(name = "qwalk", version, about = "Quantum walk search experiments on lattices")]
pub struct Cli {
    /// Master seed; every random choice derives from it.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; 1 runs everything serially. Defaults to available parallelism.
    #[arg(long, global = true, env = "QWALK_WORKERS")]
    pub workers: Option<usize>,
    /// Directory for CSV and JSON output.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Free walk from one vertex: line (with classical comparison) or square lattice.
    Walk(WalkArgs),
    /// Marked-vertex search over a list of lattice sizes.
    Search(SearchArgs),
    /// Search while tunnelling edges are switched on between two families.
    TunnelSweep(TunnelArgs),
    /// Search on W×W×l slabs against cubic lattices of similar size.
    DepthSweep(DepthArgs),
    /// Search across the connectivity chain of one dimension.
    ConnectivitySweep(ConnectivityArgs),
    /// Search averaged over site-percolated lattices.
    Percolation(PercolationArgs),
    /// Fit a scaling model to a CSV produced by another command.
    Fit(FitArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Walk(_) => "walk",
            Command::Search(_) => "search",
            Command::TunnelSweep(_) => "tunnel-sweep",
            Command::DepthSweep(_) => "depth-sweep",
            Command::ConnectivitySweep(_) => "connectivity-sweep",
            Command::Percolation(_) => "percolation",
            Command::Fit(_) => "fit",
        }
    }

    /// File stem of the summary: the command name, plus the lattice for walks.
    pub fn summary_stem(&self) -> String {
        match self {
            Command::Walk(a) => match a.lattice {
                WalkLattice::Line => "walk_line".into(),
                WalkLattice::Square2d => "walk_square2d".into(),
            },
            other => other.name().replace('-', "_"),
        }
    }
}

/// Side lengths given as `start:stop[:step]` or a comma list.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Sides(pub Vec<usize>);

/// Probabilities given as `start:stop[:step]` or a comma list.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Probs(pub Vec<f64>);

fn sides(s: &str) -> Result<Sides> {
    lists::parse_usize_list(s).map(Sides)
}

fn probs(s: &str) -> Result<Probs> {
    lists::parse_probability_list(s).map(Probs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkLattice {
    Line,
    Square2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftArg {
    Moving,
    FlipFlop,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct WalkArgs {
    #[arg(value_enum)]
    pub lattice: WalkLattice,
    #[arg(long)]
    pub steps: usize,
    /// Initial coin state: `skewed` or `symmetric` on the line, `sym` or `max` on the square lattice.
    #[arg(long)]
    pub init: Option<String>,
    /// Classical Monte Carlo walkers for the line comparison (0 disables it).
    #[arg(long, default_value_t = 50_000)]
    pub classical_iters: usize,
    /// Square lattice side; defaults to 2·steps + 3.
    #[arg(long)]
    pub side: Option<usize>,
    #[arg(long, value_enum, default_value_t = ShiftArg::Moving)]
    pub shift: ShiftArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SearchArgs {
    #[arg(long)]
    pub family: Family,
    #[arg(long, value_parser = sides)]
    pub sizes: Sides,
    /// Tunnelling probabilities; builds the family with its tunnelling ports flagged.
    #[arg(long = "p", value_parser = probs)]
    pub p_tunnel: Option<Probs>,
    #[arg(long)]
    pub t_max: Option<usize>,
    /// Also write the marked-vertex probability at every step.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TunnelArgs {
    /// Family the interpolation starts from (`stacked2d` interpolates 2D to 3D).
    #[arg(long)]
    pub from: Family,
    #[arg(long = "p", value_parser = probs, default_value = "0:1:0.1")]
    pub p_tunnel: Probs,
    #[arg(long, value_parser = sides)]
    pub sizes: Sides,
    #[arg(long)]
    pub t_max: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DepthArgs {
    /// Width and height of every slab.
    #[arg(long, default_value_t = 30)]
    pub side: usize,
    #[arg(long, value_parser = sides, default_value = "1:30")]
    pub depths: Sides,
    /// Cubic comparison sides; defaults to the cube roots of the slab sizes.
    #[arg(long, value_parser = sides)]
    pub cubic_sides: Option<Sides>,
    #[arg(long)]
    pub t_max: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ConnectivityArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
    pub dim: u8,
    #[arg(long, value_parser = sides)]
    pub sizes: Sides,
    /// Also run every link of the chain at these tunnelling probabilities.
    #[arg(long = "p", value_parser = probs)]
    pub p_tunnel: Option<Probs>,
    #[arg(long)]
    pub t_max: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PercolationArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
    pub dim: u8,
    #[arg(long, value_parser = sides, default_value = "10:40:10")]
    pub sizes: Sides,
    /// Site retention probabilities.
    #[arg(long, value_parser = probs)]
    pub p: Probs,
    /// Lattices per (size, p) cell.
    #[arg(long, default_value_t = 5000)]
    pub m: usize,
    /// Write one CSV of member records per cell.
    #[arg(long)]
    pub dump: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// LOG_PREFACTOR, SQRT_PREFACTOR, CONSTANT or POWER_LAW (short forms log, sqrt, constant, power).
    #[arg(long)]
    pub model: Model,
    /// Column holding the fitted quantity.
    #[arg(long)]
    pub y: String,
    /// Column holding the size.
    #[arg(long, default_value = "N")]
    pub x: String,
    /// Fit each distinct value of this column separately.
    #[arg(long)]
    pub group_by: Option<String>,
}

/// Run `cli` on a worker pool of the requested size and write its summary.
pub fn run(cli: &Cli) -> Result<Summary> {
    let workers = match cli.workers {
        Some(0) => anyhow::bail!("--workers must be at least 1"),
        Some(w) => w,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let started = Instant::now();
    let report = pool.install(|| commands::dispatch(cli))?;
    let summary = Summary {
        command: cli.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cli.seed,
        workers,
        config: serde_json::to_value(&cli.command)?,
        outputs: report.outputs,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        results: report.results,
    };
    let path = cli.out.join(format!("{}_summary.json", cli.command.summary_stem()));
    output::write_json(&path, &summary)?;
    Ok(summary)
}
