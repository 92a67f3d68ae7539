mod aggregate;
mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use densecolor::decomposition::DecompositionExport;
use densecolor::palette::palettes_from_json;
use densecolor::{
    canonical_palettes, generate, run, verify_coloring, ColorId, Graph, RunOptions, RunReport,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::aggregate::Aggregate;
use crate::config::{CliMode, ConfigFile, Format, RunArgs, RunConfig, Source};

const OUT_DIR_VAR: &str = "DENSECOLOR_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "densecolor",
    version,
    about = "Simulate distributed (Δ+1)-list-coloring on dense graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the algorithm, one of its phases, or a coloring check.
    Run(Box<RunArgs>),
    /// Write a generated graph as an edge list.
    Generate {
        #[arg(long)]
        gen: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failures that map to exit code 1; everything else exits with 2.
#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run_command(*args),
        Command::Generate { gen, out } => generate_command(&gen, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("densecolor: {err:#}");
            if err.downcast_ref::<CheckFailed>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn generate_command(gen: &str, out: Option<&Path>) -> anyhow::Result<()> {
    let spec: densecolor::GeneratorSpec = gen.parse()?;
    let graph = generate(&spec)?;
    emit(out, &graph.to_edge_list())
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_config(path: Option<&Path>) -> anyhow::Result<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_graph(source: &Source) -> anyhow::Result<Graph> {
    match source {
        Source::File(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Graph::parse_edge_list(&text).with_context(|| format!("parsing {}", path.display()))
        }
        Source::Generated(spec) => Ok(generate(spec)?),
    }
}

fn load_palettes(path: Option<&Path>, graph: &Graph) -> anyhow::Result<Vec<Vec<ColorId>>> {
    match path {
        None => Ok(canonical_palettes(graph)),
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            palettes_from_json(&text, graph.n())
                .with_context(|| format!("parsing {}", path.display()))
        }
    }
}

fn coloring_json(coloring: &[ColorId]) -> String {
    let map: BTreeMap<usize, u32> = coloring
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_blank())
        .map(|(v, c)| (v, c.0))
        .collect();
    serde_json::to_string_pretty(&map).expect("coloring serializes") + "\n"
}

#[derive(Serialize)]
struct RunDocument<'a> {
    report: &'a RunReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    decomposition: Option<DecompositionExport>,
}

#[derive(Serialize)]
struct VerifyDocument {
    n: usize,
    colored: usize,
    valid: bool,
    problems: Vec<String>,
}

fn run_command(args: RunArgs) -> anyhow::Result<()> {
    let file = load_config(args.config.as_deref())?;
    let out_dir = std::env::var_os(OUT_DIR_VAR).map(PathBuf::from);
    let cfg = RunConfig::resolve(args, file, out_dir)?;
    let graph = load_graph(&cfg.source)?;
    let palettes = load_palettes(cfg.palettes.as_deref(), &graph)?;

    let Some(mode) = cfg.mode.engine_mode() else {
        return verify_command(&cfg, &graph, &palettes);
    };
    let options = RunOptions {
        k: cfg.k,
        epsilon_override: cfg.epsilon,
        enforce_main_path: !cfg.force_dense,
        check_invariants: cfg.check_invariants,
        max_fallback_iters: cfg.max_fallback_iters,
        mode,
    };

    if let Some(reps) = cfg.repetitions {
        let seeds: Vec<u64> = (0..reps as u64).map(|i| cfg.seed.wrapping_add(i)).collect();
        let reports = seeds
            .par_iter()
            .map(|&seed| run(&graph, palettes.clone(), &options, seed).map(|o| o.report))
            .collect::<Result<Vec<_>, _>>()?;
        let aggregate = Aggregate::from_reports(&reports);
        let text = match cfg.format {
            Format::Json => serde_json::to_string_pretty(&aggregate)? + "\n",
            Format::Csv => aggregate.to_csv(),
        };
        emit(cfg.out.as_deref(), &text)?;
        if aggregate.failed_runs > 0 {
            return Err(
                CheckFailed(format!("{} of {} runs failed", aggregate.failed_runs, reps)).into(),
            );
        }
        return Ok(());
    }

    let outcome = run(&graph, palettes.clone(), &options, cfg.seed)?;
    let report = &outcome.report;
    let text = match cfg.format {
        Format::Json => {
            let decomposition = match (cfg.mode, &outcome.decomposition, &outcome.metrics) {
                (CliMode::DecomposeOnly, Some(d), Some(m)) => Some(d.export(m)),
                _ => None,
            };
            serde_json::to_string_pretty(&RunDocument {
                report,
                decomposition,
            })? + "\n"
        }
        Format::Csv => report.steps_csv(),
    };
    emit(cfg.out.as_deref(), &text)?;
    if let Some(path) = &cfg.coloring_out {
        emit(Some(path), &coloring_json(outcome.state.coloring()))?;
    }

    if !report.invariant_failures.is_empty() {
        return Err(CheckFailed(format!(
            "{} invariant failures, first: {}",
            report.invariant_failures.len(),
            report.invariant_failures[0]
        ))
        .into());
    }
    if report.fallback_exhausted {
        return Err(CheckFailed("fallback gave up with vertices still uncolored".into()).into());
    }
    if mode == densecolor::Mode::Full
        && !verify_coloring(&graph, &palettes, outcome.state.coloring()).is_empty()
    {
        return Err(
            CheckFailed("final coloring is not a complete proper list coloring".into()).into(),
        );
    }
    Ok(())
}

fn verify_command(cfg: &RunConfig, graph: &Graph, palettes: &[Vec<ColorId>]) -> anyhow::Result<()> {
    let path = cfg
        .coloring
        .as_deref()
        .context("verify mode needs --coloring")?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let map: BTreeMap<usize, u32> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut coloring = vec![ColorId::BLANK; graph.n()];
    for (v, c) in map {
        anyhow::ensure!(
            v < graph.n(),
            "coloring names vertex {v}, graph has {} vertices",
            graph.n()
        );
        coloring[v] = ColorId(c);
    }
    let problems = verify_coloring(graph, palettes, &coloring);
    let doc = VerifyDocument {
        n: graph.n(),
        colored: coloring.iter().filter(|c| !c.is_blank()).count(),
        valid: problems.is_empty(),
        problems,
    };
    emit(
        cfg.out.as_deref(),
        &(serde_json::to_string_pretty(&doc)? + "\n"),
    )?;
    if !doc.valid {
        return Err(CheckFailed(format!(
            "{} problems in {}",
            doc.problems.len(),
            path.display()
        ))
        .into());
    }
    Ok(())
}
