use std::path::PathBuf;

use clap::{Args, ValueEnum};
use densecolor::{GeneratorSpec, Mode};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CliMode {
    Full,
    DecomposeOnly,
    InitialOnly,
    DenseSteps,
    FallbackOnly,
    Verify,
}

impl CliMode {
    pub fn engine_mode(self) -> Option<Mode> {
        match self {
            CliMode::Full => Some(Mode::Full),
            CliMode::DecomposeOnly => Some(Mode::DecomposeOnly),
            CliMode::InitialOnly => Some(Mode::InitialOnly),
            CliMode::DenseSteps => Some(Mode::DenseSteps),
            CliMode::FallbackOnly => Some(Mode::FallbackOnly),
            CliMode::Verify => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// A generator given either in compact syntax or as a JSON object.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GenValue {
    Compact(String),
    Spec(GeneratorSpec),
}

impl GenValue {
    pub fn spec(&self) -> anyhow::Result<GeneratorSpec> {
        match self {
            GenValue::Compact(s) => Ok(s.parse()?),
            GenValue::Spec(spec) => Ok(spec.clone()),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON file with default values for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Edge-list file.
    #[arg(long, conflicts_with = "gen")]
    pub input: Option<PathBuf>,
    /// Generator, e.g. `complete:21`, `gnp:1000,0.5,3`, `clique_chain:21x8`.
    #[arg(long)]
    pub gen: Option<String>,
    /// `canonical` for `{1..Δ+1}` everywhere, or a JSON file mapping vertex
    /// IDs to color lists.
    #[arg(long)]
    pub palettes: Option<String>,
    /// The constant K; ε is derived from Δ and K unless `--epsilon` is given.
    #[arg(long = "k", alias = "K", visible_alias = "epsilon-from-K")]
    pub k: Option<f64>,
    /// Use the large K of strict mode.
    #[arg(long = "strict-k", alias = "strict-K")]
    pub strict_k: bool,
    /// Fixed ε for both the decomposition and the schedule.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<CliMode>,
    /// Report path. Defaults to `$DENSECOLOR_OUT_DIR/report.<ext>` when that
    /// variable is set, standard output otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Run seeds `seed, seed+1, ...` and report aggregate statistics.
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Where to save the final coloring (JSON map vertex -> color).
    #[arg(long)]
    pub coloring_out: Option<PathBuf>,
    /// Coloring to check in `verify` mode.
    #[arg(long)]
    pub coloring: Option<PathBuf>,
    /// Take the decomposition and dense steps even when `ε⁴Δ < K ln n`.
    #[arg(long)]
    pub force_dense: bool,
    #[arg(long)]
    pub max_fallback_iters: Option<usize>,
    /// Skip the per-commit invariant checks.
    #[arg(long)]
    pub no_invariant_checks: bool,
}

/// Mirror of [`RunArgs`] as read from `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct ConfigFile {
    pub input: Option<PathBuf>,
    pub gen: Option<GenValue>,
    pub palettes: Option<String>,
    #[serde(alias = "K")]
    pub k: Option<f64>,
    #[serde(default)]
    pub strict_k: bool,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub mode: Option<CliMode>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub repetitions: Option<usize>,
    pub coloring_out: Option<PathBuf>,
    pub coloring: Option<PathBuf>,
    #[serde(default)]
    pub force_dense: bool,
    pub max_fallback_iters: Option<usize>,
    #[serde(default)]
    pub no_invariant_checks: bool,
}

#[derive(Debug, Clone)]
pub enum Source {
    File(PathBuf),
    Generated(GeneratorSpec),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: Source,
    pub palettes: Option<PathBuf>,
    pub k: f64,
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub mode: CliMode,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub repetitions: Option<usize>,
    pub coloring_out: Option<PathBuf>,
    pub coloring: Option<PathBuf>,
    pub force_dense: bool,
    pub max_fallback_iters: usize,
    pub check_invariants: bool,
}

impl RunConfig {
    /// Flags win over the config file.
    pub fn resolve(
        args: RunArgs,
        file: ConfigFile,
        out_dir: Option<PathBuf>,
    ) -> anyhow::Result<RunConfig> {
        let gen = match args.gen {
            Some(s) => Some(GenValue::Compact(s)),
            None if args.input.is_none() => file.gen,
            None => None,
        };
        let input = args.input.or(if gen.is_none() { file.input } else { None });
        let source = match (input, gen) {
            (Some(path), None) => Source::File(path),
            (None, Some(gen)) => Source::Generated(gen.spec()?),
            (Some(_), Some(_)) => {
                anyhow::bail!("give either an input file or a generator, not both")
            }
            (None, None) => anyhow::bail!("no graph given: use --input or --gen"),
        };
        let palettes = match args.palettes.or(file.palettes) {
            None => None,
            Some(p) if p == "canonical" => None,
            Some(p) => Some(PathBuf::from(p)),
        };
        let strict = args.strict_k || file.strict_k;
        let k = match (args.k.or(file.k), strict) {
            (Some(_), true) => anyhow::bail!("--k and --strict-k are mutually exclusive"),
            (Some(k), false) => k,
            (None, true) => densecolor::schedule::STRICT_K,
            (None, false) => densecolor::schedule::DEFAULT_K,
        };
        let format = args.format.or(file.format).unwrap_or_default();
        let out = args.out.or(file.out).or_else(|| {
            let ext = match format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            out_dir.map(|dir| dir.join(format!("report.{ext}")))
        });
        let repetitions = args.repetitions.or(file.repetitions);
        if repetitions == Some(0) {
            anyhow::bail!("--repetitions must be at least 1");
        }
        Ok(RunConfig {
            source,
            palettes,
            k,
            epsilon: args.epsilon.or(file.epsilon),
            seed: args.seed.or(file.seed).unwrap_or(0),
            mode: args.mode.or(file.mode).unwrap_or(CliMode::Full),
            out,
            format,
            repetitions,
            coloring_out: args.coloring_out.or(file.coloring_out),
            coloring: args.coloring.or(file.coloring),
            force_dense: args.force_dense || file.force_dense,
            max_fallback_iters: args
                .max_fallback_iters
                .or(file.max_fallback_iters)
                .unwrap_or(densecolor::engine::DEFAULT_MAX_FALLBACK_ITERS),
            check_invariants: !(args.no_invariant_checks || file.no_invariant_checks),
        })
    }
}
