//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::copies::{enumerate_copies, motif_count, DEFAULT_COPY_CAP};
use crate::error::Result;
use crate::estimator::{consistency_diagnostic, estimate, m_diagnostic, sample_vertices, TruncationReport};
use crate::generators::EnsembleSpec;
use crate::graph::{load_graph, Graph};
use crate::harness::{
    records_csv, reproduce, run_experiment, sweep_csv, threshold_sweep, with_threads, ExperimentSpec,
    RecipeExperiment, RecipeName, RecipeResult, SweepSpec, DEFAULT_SEED,
};
use crate::moments::{exact_variance, moment_report, MomentMode, DEFAULT_QUAD_CAP};
use crate::motif::{Motif, MotifInfo};

#[derive(Debug, Parser)]
#[command(name = "motif-ht", version, about = "Horvitz-Thompson motif estimation under vertex sampling")]
pub struct Cli {
    /// Random seed (sampling seed, or master seed for experiments).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write JSON output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write a flat CSV table here.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GraphMotif {
    /// Edge-list or JSON graph file.
    #[arg(long)]
    pub graph: PathBuf,
    /// Motif name (edge, wedge, triangle, path4, cycle4, clique4, star_<k>) or
    /// an inline edge list such as "0-1,1-2,2-0".
    #[arg(long)]
    pub motif: String,
    #[arg(long, default_value_t = DEFAULT_COPY_CAP)]
    pub copy_cap: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Exact,
    Mc,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a graph from an ensemble given as JSON (inline or a file path).
    Generate {
        #[arg(long)]
        ensemble: String,
        /// Emit the JSON graph form instead of an edge list.
        #[arg(long)]
        json: bool,
    },
    /// Count copies of a motif.
    Count {
        #[command(flatten)]
        gm: GraphMotif,
    },
    /// Sample vertices once and report the estimate with its interval.
    Estimate {
        #[command(flatten)]
        gm: GraphMotif,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Consistency and truncation diagnostics over the ε and M grids.
    Diagnose {
        #[command(flatten)]
        gm: GraphMotif,
        #[arg(long)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_values_t = crate::estimator::EPSILON_GRID.to_vec())]
        eps: Vec<f64>,
        #[arg(long = "m", value_delimiter = ',', default_values_t = crate::estimator::M_GRID.to_vec())]
        m_grid: Vec<f64>,
        /// Flagged sets listed per level; the count is always complete.
        #[arg(long, default_value_t = 20)]
        max_listed: usize,
    },
    /// Exact variance, β bracket, E[W] and E[Z⁴].
    Moments {
        #[command(flatten)]
        gm: GraphMotif,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_QUAD_CAP)]
        quad_cap: usize,
    },
    /// Run Monte Carlo replications from an experiment spec (JSON file).
    Simulate {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Run a threshold sweep from a sweep spec (JSON file).
    Sweep {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Run a canned recipe: ex51, ex52, ex53, ex54, fig1 or fig2.
    Reproduce { name: String },
}

fn read_json<T: serde::de::DeserializeOwned>(arg: &str) -> Result<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)?
    };
    Ok(serde_json::from_str(&text)?)
}

fn write_to(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit<T: Serialize>(cli: &Cli, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_to(cli.out.as_deref(), &text)
}

fn load(gm: &GraphMotif) -> Result<(Graph, Motif)> {
    Ok((load_graph(&gm.graph)?, Motif::parse(&gm.motif)?))
}

fn trim(mut r: TruncationReport, max: usize) -> TruncationReport {
    r.flagged_sets.truncate(max);
    r
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match &cli.command {
        Command::Generate { ensemble, json } => {
            let mut spec: EnsembleSpec = read_json(ensemble)?;
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            for w in spec.guidance() {
                eprintln!("warning: {w}");
            }
            let g = spec.generate()?;
            let text = if *json {
                serde_json::to_string(&g.to_json())? + "\n"
            } else {
                g.to_edge_list()
            };
            write_to(cli.out.as_deref(), &text)
        }
        Command::Count { gm } => {
            let (g, motif) = load(gm)?;
            emit(cli, &json!({
                "motif": MotifInfo::from(&motif),
                "vertices": g.n(),
                "edges": g.m(),
                "N": motif_count(&g, &motif),
            }))
        }
        Command::Estimate { gm, p, alpha } => {
            let (g, motif) = load(gm)?;
            let copies = enumerate_copies(&g, &motif, gm.copy_cap)?;
            let mask = sample_vertices(g.n(), *p, seed)?;
            emit(cli, &estimate(&copies, &mask, *alpha)?)
        }
        Command::Diagnose { gm, p, eps, m_grid, max_listed } => {
            let (g, motif) = load(gm)?;
            let copies = enumerate_copies(&g, &motif, gm.copy_cap)?;
            let var_t = exact_variance(&copies, *p);
            let eps_reports = eps
                .iter()
                .map(|&e| consistency_diagnostic(&copies, *p, e).map(|r| trim(r, *max_listed)))
                .collect::<Result<Vec<_>>>()?;
            let m_reports = m_grid
                .iter()
                .map(|&m| m_diagnostic(&copies, *p, m, var_t).map(|r| trim(r, *max_listed)))
                .collect::<Result<Vec<_>>>()?;
            emit(cli, &json!({ "N": copies.len(), "var_t": var_t, "epsilon": eps_reports, "m": m_reports }))
        }
        Command::Moments { gm, p, mode, reps, quad_cap } => {
            let (g, motif) = load(gm)?;
            let copies = enumerate_copies(&g, &motif, gm.copy_cap)?;
            let mode = match mode {
                ModeArg::Exact => MomentMode::Exact,
                ModeArg::Mc => MomentMode::MonteCarlo,
            };
            let report = with_threads(cli.threads, || moment_report(&copies, *p, mode, *reps, seed, *quad_cap))??;
            emit(cli, &report)
        }
        Command::Simulate { spec } => {
            let mut spec: ExperimentSpec = read_json(&spec.to_string_lossy())?;
            if let Some(s) = cli.seed {
                spec.master_seed = s;
            }
            let summary = with_threads(cli.threads, || run_experiment(&spec))??;
            if let Some(path) = &cli.csv {
                std::fs::write(path, records_csv(&spec, &summary.records))?;
            }
            emit(cli, &json!({ "spec": spec, "summary": summary }))
        }
        Command::Sweep { spec } => {
            let mut spec: SweepSpec = read_json(&spec.to_string_lossy())?;
            if let Some(s) = cli.seed {
                spec.base.master_seed = s;
            }
            let report = with_threads(cli.threads, || threshold_sweep(&spec))??;
            if let Some(path) = &cli.csv {
                std::fs::write(path, sweep_csv(&report))?;
            }
            emit(cli, &json!({ "spec": spec, "sweep": report }))
        }
        Command::Reproduce { name } => {
            let name: RecipeName = name.parse()?;
            let report = with_threads(cli.threads, || reproduce(name, seed))??;
            if let Some(path) = &cli.csv {
                let text = match (&report.result, &report.recipe.experiment) {
                    (RecipeResult::Single(s), RecipeExperiment::Single(spec)) => {
                        records_csv(spec, &s.records)
                    }
                    (RecipeResult::Sweep(r), _) => sweep_csv(r),
                    _ => String::new(),
                };
                std::fs::write(path, text)?;
            }
            emit(cli, &report)
        }
    }
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

