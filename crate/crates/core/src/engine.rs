//! The coloring algorithm: decomposition, one initial random step, a
//! sequence of permutation-based dense steps inside almost-cliques, and a
//! randomized trial fallback for whatever is left.
//!
//! Each clique's dense step is simulated centrally, as its leader would:
//! the leader knows every member's residual palette, so it draws the
//! permutation and all prefix picks itself.
//!
//! Round accounting: decomposition 3, initial step 2, each dense step 5
//! (gather to the leader and scatter back over weak diameter 2, plus one
//! conflict exchange), each fallback iteration 2.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::decomposition::{self, Decomposition, StructuralMetrics, DECOMPOSITION_ROUNDS};
use crate::error::{InvariantViolation, RunError};
use crate::graph::{Graph, VertexId};
use crate::palette::{ColorId, ResidualPalette};
use crate::rng::{stream, StreamTag};
use crate::schedule::{self, RoundParams, ScheduleParams, INITIAL_ACTIVATION_PROBABILITY};
use crate::state::{init_state, ColoringState};

pub const INITIAL_STEP_ROUNDS: usize = 2;
pub const DENSE_STEP_ROUNDS: usize = 5;
pub const FALLBACK_ITERATION_ROUNDS: usize = 2;
pub const DEFAULT_MAX_FALLBACK_ITERS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Initial,
    Dense,
    FallbackSparse,
    FallbackResidual,
}

/// Parameters a dense step ran with, and what its palette-floor check saw.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseStepDetail {
    pub gamma: f64,
    /// Whether the parameters in force satisfied the regularity conditions.
    pub regular: bool,
    pub d: Option<f64>,
    pub z: Option<f64>,
    pub delta: Option<f64>,
    /// Prefix vertices whose palette floor was checked.
    pub floor_checked: usize,
    /// Prefix vertices skipped by the check because `a(v) <= D` or
    /// `Q(v) >= Z` did not hold at the start of the step.
    pub floor_hypothesis_unmet: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepStats {
    pub kind: StepKind,
    /// 1-based dense step number; 0 for other kinds.
    pub index: usize,
    /// Uncolored vertices eligible to take part.
    pub participants: usize,
    /// Vertices that drew a nonblank tentative color.
    pub attempted: usize,
    pub colored: usize,
    pub decolored: usize,
    /// Clique members outside the permutation prefix.
    pub initially_uncolored: usize,
    /// Prefix vertices with nothing left to pick from.
    pub empty_palette_skips: usize,
    pub iterations: usize,
    pub rounds: usize,
    /// Surplus over the uncolored sparse vertices after the step.
    pub sparse_surplus_min: Option<i64>,
    pub sparse_surplus_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense: Option<DenseStepDetail>,
}

impl StepStats {
    fn new(kind: StepKind, index: usize, participants: usize) -> Self {
        StepStats {
            kind,
            index,
            participants,
            attempted: 0,
            colored: 0,
            decolored: 0,
            initially_uncolored: 0,
            empty_palette_skips: 0,
            iterations: 0,
            rounds: 0,
            sparse_surplus_min: None,
            sparse_surplus_mean: None,
            dense: None,
        }
    }

    fn record_sparse_surplus(&mut self, state: &ColoringState, decomp: Option<&Decomposition>) {
        let Some(decomp) = decomp else { return };
        let surpluses: Vec<i64> = state
            .uncolored()
            .filter(|&v| !decomp.is_dense(v))
            .map(|v| state.surplus(v))
            .collect();
        self.sparse_surplus_min = surpluses.iter().copied().min();
        if !surpluses.is_empty() {
            self.sparse_surplus_mean =
                Some(surpluses.iter().sum::<i64>() as f64 / surpluses.len() as f64);
        }
    }
}

/// Runs consistency checks after every commit and collects failures.
#[derive(Debug, Clone, Default)]
pub struct InvariantMonitor {
    enabled: bool,
    commits_checked: usize,
    last_surplus: Vec<i64>,
    failures: Vec<String>,
}

impl InvariantMonitor {
    pub fn new(enabled: bool, state: &ColoringState) -> Self {
        InvariantMonitor {
            enabled,
            commits_checked: 0,
            last_surplus: (0..state.n()).map(|v| state.surplus(v)).collect(),
            failures: Vec::new(),
        }
    }

    pub fn disabled() -> Self {
        InvariantMonitor::default()
    }

    pub fn failures(&self) -> &[String] {
        &self.failures
    }

    pub fn commits_checked(&self) -> usize {
        self.commits_checked
    }

    pub fn record(&mut self, context: &str, failure: impl std::fmt::Display) {
        self.failures.push(format!("{context}: {failure}"));
    }

    fn after_commit(&mut self, graph: &Graph, state: &ColoringState, context: &str) {
        if !self.enabled {
            return;
        }
        self.commits_checked += 1;
        for violation in state.check_consistency(graph) {
            self.record(context, violation);
        }
        for v in state.uncolored() {
            let now = state.surplus(v);
            if now < self.last_surplus[v] {
                let violation = InvariantViolation::SurplusDecreased {
                    vertex: v,
                    before: self.last_surplus[v],
                    after: now,
                };
                self.record(context, violation);
            }
            self.last_surplus[v] = now;
        }
    }

    fn commit(
        &mut self,
        graph: &Graph,
        state: &mut ColoringState,
        assignments: &[(VertexId, ColorId)],
        context: &str,
    ) -> Result<(), InvariantViolation> {
        let result = state.commit_colors(graph, assignments);
        if let Err(violation) = &result {
            self.record(context, violation);
        }
        self.after_commit(graph, state, context);
        result.map(|_| ())
    }
}

/// One initial-step draw: blank with probability 99/100, otherwise a
/// uniform color from the palette.
pub fn draw_initial_tentative<R: Rng + ?Sized>(palette: &ResidualPalette, rng: &mut R) -> ColorId {
    if rng.gen_bool(INITIAL_ACTIVATION_PROBABILITY) {
        palette.sample(rng).unwrap_or(ColorId::BLANK)
    } else {
        ColorId::BLANK
    }
}

/// The initial coloring step on a fresh state. Records the post-step
/// snapshot `(Pal_0, Q_0, d_0)`.
pub fn initial_coloring_step(
    graph: &Graph,
    state: &mut ColoringState,
    seed: u64,
    monitor: &mut InvariantMonitor,
) -> Result<StepStats, InvariantViolation> {
    let tentative: Vec<ColorId> = graph
        .vertices()
        .map(|v| {
            if state.is_colored(v) {
                return ColorId::BLANK;
            }
            let mut rng = stream(seed, StreamTag::Initial, v);
            draw_initial_tentative(state.palette(v), &mut rng)
        })
        .collect();
    apply_initial_tentative(graph, state, &tentative, monitor)
}

/// Resolves given initial-step tentative colors: `v` keeps `A(v) != 0`
/// unless some neighbor drew the same color.
pub fn apply_initial_tentative(
    graph: &Graph,
    state: &mut ColoringState,
    tentative: &[ColorId],
    monitor: &mut InvariantMonitor,
) -> Result<StepStats, InvariantViolation> {
    let mut stats = StepStats::new(StepKind::Initial, 0, state.uncolored_count());
    state.clear_tentative();
    for (v, &color) in tentative.iter().enumerate() {
        if !color.is_blank() && !state.is_colored(v) {
            state.set_tentative(v, color);
        }
    }
    let mut assignments = Vec::new();
    for v in graph.vertices() {
        let color = state.tentative(v);
        if color.is_blank() {
            continue;
        }
        stats.attempted += 1;
        if graph
            .neighbors(v)
            .iter()
            .any(|&w| state.tentative(w) == color)
        {
            stats.decolored += 1;
        } else {
            assignments.push((v, color));
        }
    }
    monitor.commit(graph, state, &assignments, "initial step")?;
    stats.colored = assignments.len();
    stats.rounds = INITIAL_STEP_ROUNDS;
    state.record_snapshot();
    Ok(stats)
}

/// What happened inside one clique during a dense step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliqueTrace {
    pub leader: VertexId,
    /// `M_j`, residual members at the start of the step.
    pub residual_size: usize,
    /// `L_j = ⌈M_j γ⌉`.
    pub prefix_len: usize,
    /// `π_j(1..=L_j)`.
    pub prefix: Vec<VertexId>,
    /// Tentative color of each prefix vertex; blank if it had nothing
    /// left to pick.
    pub tentative: Vec<ColorId>,
    /// `Q(v)` of each prefix vertex at the start of the step.
    pub palette_size: Vec<usize>,
    /// Residual `a(v)` of each prefix vertex at the start of the step.
    pub anti_degree: Vec<usize>,
    /// Colors each prefix vertex could choose from at its turn.
    pub in_step_palette: Vec<usize>,
    pub decolored: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseStepOutcome {
    pub stats: StepStats,
    pub cliques: Vec<CliqueTrace>,
}

/// `⌈m γ⌉`, clamped to `0..=m`.
pub fn prefix_len(m: usize, gamma: f64) -> usize {
    let raw = (m as f64 * gamma - 1e-9).ceil();
    (raw.max(0.0) as usize).min(m)
}

/// One dense coloring step with parameter `gamma`. Sparse vertices sit out.
pub fn dense_coloring_step(
    graph: &Graph,
    state: &mut ColoringState,
    decomp: &Decomposition,
    gamma: f64,
    seed: u64,
    step_index: usize,
    monitor: &mut InvariantMonitor,
) -> Result<DenseStepOutcome, RunError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(RunError::BadGamma(gamma));
    }
    state.clear_tentative();
    let mut traces = Vec::with_capacity(decomp.cliques().len());
    let mut skips = 0;
    for clique in decomp.cliques() {
        let mut residual: Vec<VertexId> = clique
            .members
            .iter()
            .copied()
            .filter(|&v| !state.is_colored(v))
            .collect();
        let m = residual.len();
        let len = prefix_len(m, gamma);
        let mut rng = stream(seed, StreamTag::Dense(step_index), clique.leader);
        residual.shuffle(&mut rng);
        residual.truncate(len);

        let mut picks: Vec<ColorId> = Vec::with_capacity(len);
        let mut picked: HashSet<ColorId> = HashSet::with_capacity(len);
        let mut palette_size = Vec::with_capacity(len);
        let mut anti_degree = Vec::with_capacity(len);
        let mut in_step = Vec::with_capacity(len);
        let mut tentative = Vec::with_capacity(len);
        let j = decomp.clique_of(clique.leader).expect("leaders are dense");
        for &v in &residual {
            let internal = graph
                .neighbors(v)
                .iter()
                .filter(|&&w| !state.is_colored(w) && decomp.clique_of(w) == Some(j))
                .count();
            anti_degree.push(m - 1 - internal);
            let palette = state.palette(v);
            let q = palette.len();
            let blocked = picks.iter().filter(|&&c| palette.contains(c)).count();
            let available = q - blocked;
            palette_size.push(q);
            in_step.push(available);
            if available == 0 {
                skips += 1;
                tentative.push(ColorId::BLANK);
                continue;
            }
            let color = if available * 4 >= q {
                loop {
                    let c = palette.sample(&mut rng).expect("palette is nonempty");
                    if !picked.contains(&c) {
                        break c;
                    }
                }
            } else {
                let candidates: Vec<ColorId> =
                    palette.iter().filter(|c| !picked.contains(c)).collect();
                candidates[rng.gen_range(0..candidates.len())]
            };
            picks.push(color);
            picked.insert(color);
            tentative.push(color);
            state.set_tentative(v, color);
        }
        traces.push(CliqueTrace {
            leader: clique.leader,
            residual_size: m,
            prefix_len: len,
            prefix: residual,
            tentative,
            palette_size,
            anti_degree,
            in_step_palette: in_step,
            decolored: Vec::new(),
        });
    }

    let participants = traces.iter().map(|t| t.residual_size).sum();
    let mut stats = StepStats::new(StepKind::Dense, step_index, participants);
    stats.initially_uncolored = traces.iter().map(|t| t.residual_size - t.prefix_len).sum();
    stats.empty_palette_skips = skips;
    let assignments = resolve_dense(graph, state, decomp, &mut traces, &mut stats);
    monitor.commit(
        graph,
        state,
        &assignments,
        &format!("dense step {step_index}"),
    )?;
    stats.colored = assignments.len();
    stats.rounds = DENSE_STEP_ROUNDS;
    Ok(DenseStepOutcome {
        stats,
        cliques: traces,
    })
}

/// Resolves given dense-step tentative colors for dense vertices: `v` in
/// clique `C_j` commits unless a dense neighbor in a clique with a smaller
/// leader drew the same color. Entries for sparse or colored vertices are
/// ignored.
pub fn apply_dense_tentative(
    graph: &Graph,
    state: &mut ColoringState,
    decomp: &Decomposition,
    tentative: &[ColorId],
    monitor: &mut InvariantMonitor,
) -> Result<DenseStepOutcome, InvariantViolation> {
    state.clear_tentative();
    let mut traces: Vec<CliqueTrace> = decomp
        .cliques()
        .iter()
        .map(|c| {
            let residual: Vec<VertexId> = c
                .members
                .iter()
                .copied()
                .filter(|&v| !state.is_colored(v))
                .collect();
            let prefix: Vec<VertexId> = residual
                .iter()
                .copied()
                .filter(|&v| !tentative[v].is_blank())
                .collect();
            let residual_size = residual.len();
            CliqueTrace {
                leader: c.leader,
                residual_size,
                prefix_len: prefix.len(),
                tentative: prefix.iter().map(|&v| tentative[v]).collect(),
                palette_size: prefix.iter().map(|&v| state.palette_size(v)).collect(),
                anti_degree: prefix
                    .iter()
                    .map(|&v| {
                        let internal = graph
                            .neighbors(v)
                            .iter()
                            .filter(|&&w| {
                                !state.is_colored(w) && c.members.binary_search(&w).is_ok()
                            })
                            .count();
                        residual_size - 1 - internal
                    })
                    .collect(),
                in_step_palette: Vec::new(),
                prefix,
                decolored: Vec::new(),
            }
        })
        .collect();
    for trace in &traces {
        for &v in &trace.prefix {
            state.set_tentative(v, tentative[v]);
        }
    }
    let participants = traces.iter().map(|t| t.residual_size).sum();
    let mut stats = StepStats::new(StepKind::Dense, 0, participants);
    stats.initially_uncolored = traces.iter().map(|t| t.residual_size - t.prefix_len).sum();
    let assignments = resolve_dense(graph, state, decomp, &mut traces, &mut stats);
    monitor.commit(graph, state, &assignments, "dense step")?;
    stats.colored = assignments.len();
    Ok(DenseStepOutcome {
        stats,
        cliques: traces,
    })
}

fn resolve_dense(
    graph: &Graph,
    state: &ColoringState,
    decomp: &Decomposition,
    traces: &mut [CliqueTrace],
    stats: &mut StepStats,
) -> Vec<(VertexId, ColorId)> {
    let mut assignments = Vec::new();
    for (j, trace) in traces.iter_mut().enumerate() {
        for &v in &trace.prefix {
            let color = state.tentative(v);
            if color.is_blank() {
                continue;
            }
            stats.attempted += 1;
            // Cliques are indexed in leader order, so a smaller index means
            // a smaller leader ID.
            let loses = graph.neighbors(v).iter().any(|&w| {
                state.tentative(w) == color && decomp.clique_of(w).is_some_and(|k| k < j)
            });
            if loses {
                trace.decolored.push(v);
                stats.decolored += 1;
            } else {
                assignments.push((v, color));
            }
        }
    }
    assignments
}

/// Members of one clique whose tentative colors repeat, as a list of
/// `(leader, color)` pairs.
pub fn duplicate_prefix_colors(traces: &[CliqueTrace]) -> Vec<(VertexId, ColorId)> {
    let mut out = Vec::new();
    for trace in traces {
        let mut seen = HashSet::new();
        for &c in &trace.tentative {
            if !c.is_blank() && !seen.insert(c) {
                out.push((trace.leader, c));
            }
        }
    }
    out
}

/// Outcome of checking `Q(v) - L_j >= Z√δ + D` (and the in-step palette
/// against the same floor) for every prefix vertex.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FloorCheck {
    pub checked: usize,
    pub hypothesis_unmet: usize,
    pub violations: Vec<String>,
}

/// Checks the palette floor for a dense step run with parameters `params`
/// (the `D`, `Z` in force at the start of the step).
///
/// The bound is only claimed for vertices with `a(v) <= D` and
/// `Q(v) >= Z`; others are counted as `hypothesis_unmet` and not checked.
pub fn check_palette_floor(params: &RoundParams, traces: &[CliqueTrace]) -> FloorCheck {
    let floor = params.z * params.delta.sqrt() + params.d;
    let mut check = FloorCheck::default();
    for trace in traces {
        for (k, &v) in trace.prefix.iter().enumerate() {
            let anti = trace.anti_degree[k];
            let q = trace.palette_size[k];
            if anti as f64 > params.d || (q as f64) < params.z {
                check.hypothesis_unmet += 1;
                continue;
            }
            check.checked += 1;
            let slack = q as f64 - trace.prefix_len as f64;
            if slack + 1e-9 < floor {
                check.violations.push(format!(
                    "vertex {v}: Q - L = {slack} below Z√δ + D = {floor}"
                ));
            }
            if let Some(&avail) = trace.in_step_palette.get(k) {
                if (avail as f64) + 1e-9 < floor {
                    check.violations.push(format!(
                        "vertex {v}: in-step palette {avail} below Z√δ + D = {floor}"
                    ));
                }
            }
        }
    }
    check
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FallbackOutcome {
    pub stats: StepStats,
    pub exhausted: bool,
}

/// Repeated random trials: every participating uncolored vertex picks a
/// uniform residual color and keeps it unless an uncolored neighbor picked
/// the same. Stops when no participant is left or after `max_iters`.
///
/// `participants[v] == false` keeps `v` out; `None` lets everyone in.
pub fn fallback_coloring(
    graph: &Graph,
    state: &mut ColoringState,
    participants: Option<&[bool]>,
    kind: StepKind,
    seed: u64,
    max_iters: usize,
    monitor: &mut InvariantMonitor,
) -> Result<FallbackOutcome, InvariantViolation> {
    let takes_part = |state: &ColoringState, v: VertexId| {
        !state.is_colored(v) && participants.is_none_or(|p| p[v])
    };
    let mut active: Vec<VertexId> = graph.vertices().filter(|&v| takes_part(state, v)).collect();
    let mut stats = StepStats::new(kind, 0, active.len());
    let mut iteration = 0;
    while !active.is_empty() && iteration < max_iters {
        let tag = match kind {
            StepKind::FallbackSparse => StreamTag::FallbackSparse(iteration),
            _ => StreamTag::FallbackResidual(iteration),
        };
        state.clear_tentative();
        for &v in &active {
            let mut rng = stream(seed, tag, v);
            match state.palette(v).sample(&mut rng) {
                Some(c) => state.set_tentative(v, c),
                None => monitor.record(
                    "fallback",
                    format!("vertex {v} has an empty residual palette"),
                ),
            }
        }
        let mut assignments = Vec::new();
        for &v in &active {
            let color = state.tentative(v);
            if color.is_blank() {
                continue;
            }
            stats.attempted += 1;
            if graph
                .neighbors(v)
                .iter()
                .any(|&w| state.tentative(w) == color)
            {
                stats.decolored += 1;
            } else {
                assignments.push((v, color));
            }
        }
        monitor.commit(
            graph,
            state,
            &assignments,
            &format!("fallback iteration {iteration}"),
        )?;
        stats.colored += assignments.len();
        iteration += 1;
        active.retain(|&v| !state.is_colored(v));
    }
    state.clear_tentative();
    stats.iterations = iteration;
    stats.rounds = iteration * FALLBACK_ITERATION_ROUNDS;
    Ok(FallbackOutcome {
        stats,
        exhausted: !active.is_empty(),
    })
}

/// Good-color diagnostic for the state right after the initial step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodColorDiag {
    /// `|J(v)|`.
    pub good: Vec<usize>,
    /// `S_0(v)`, recomputed from the committed colors.
    pub surplus: Vec<i64>,
}

impl GoodColorDiag {
    /// Vertices with `S_0(v) < |J(v)|`.
    pub fn violations(&self) -> Vec<VertexId> {
        (0..self.good.len())
            .filter(|&v| self.surplus[v] < self.good[v] as i64)
            .collect()
    }
}

/// Counts, for every vertex, the colors `c` with at least
/// `1 + [c ∈ Pal(v)]` neighbors committed to `c`, against the original
/// palettes held in `state`.
///
/// `S_0(v)` is recomputed from scratch (residual palette and uncolored
/// degree as if `v` itself were still uncolored), so colored vertices get
/// a value too.
pub fn count_good_colors(graph: &Graph, state: &ColoringState) -> GoodColorDiag {
    let n = graph.n();
    let mut good = Vec::with_capacity(n);
    let mut surplus = Vec::with_capacity(n);
    let mut colors = Vec::new();
    for v in graph.vertices() {
        colors.clear();
        colors.extend(
            graph
                .neighbors(v)
                .iter()
                .map(|&w| state.committed(w))
                .filter(|c| !c.is_blank()),
        );
        colors.sort_unstable();
        let palette = state.palette(v);
        let mut count_good = 0;
        let mut distinct_in_palette = 0;
        for run in colors.chunk_by(|a, b| a == b) {
            let in_palette = palette.in_original(run[0]);
            if run.len() > usize::from(in_palette) {
                count_good += 1;
            }
            distinct_in_palette += usize::from(in_palette);
        }
        let q0 = palette.original().len() - distinct_in_palette;
        let d0 = graph.degree(v) - colors.len();
        good.push(count_good);
        surplus.push(q0 as i64 - d0 as i64);
    }
    GoodColorDiag { good, surplus }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Full,
    DecomposeOnly,
    InitialOnly,
    DenseSteps,
    FallbackOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub k: f64,
    /// Replaces the formula value of ε for both the decomposition and the
    /// schedule.
    pub epsilon_override: Option<f64>,
    /// When set, runs with `ε⁴Δ < K ln n` go straight to the fallback.
    pub enforce_main_path: bool,
    pub check_invariants: bool,
    pub max_fallback_iters: usize,
    pub mode: Mode,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            k: schedule::DEFAULT_K,
            epsilon_override: None,
            enforce_main_path: true,
            check_invariants: true,
            max_fallback_iters: DEFAULT_MAX_FALLBACK_ITERS,
            mode: Mode::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionSummary {
    pub sparse: usize,
    pub cliques: usize,
    pub largest_clique: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodColorSummary {
    pub vertices: usize,
    pub max_good: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub n: usize,
    pub delta: usize,
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub mode: Mode,
    pub main_path: bool,
    /// Whether the initial and dense steps ran (the main path, or the
    /// gate was disabled).
    pub dense_path_taken: bool,
    pub rounds_used: usize,
    pub colored: usize,
    pub complete: bool,
    pub fallback_exhausted: bool,
    pub oversized_palettes: bool,
    pub commits_checked: usize,
    pub steps: Vec<StepStats>,
    pub invariant_failures: Vec<String>,
    pub decomposition: Option<DecompositionSummary>,
    pub good_colors: Option<GoodColorSummary>,
    pub schedule: Option<ScheduleParams>,
}

impl RunReport {
    /// Complete, proper and free of invariant failures.
    pub fn success(&self) -> bool {
        self.invariant_failures.is_empty()
            && !self.fallback_exhausted
            && (self.complete || self.mode != Mode::Full && self.mode != Mode::FallbackOnly)
    }

    /// Per-step counts as CSV, header included.
    pub fn steps_csv(&self) -> String {
        let mut out = String::from(
            "kind,index,participants,attempted,colored,decolored,initially_uncolored,empty_palette_skips,iterations,rounds\n",
        );
        for s in &self.steps {
            let kind = serde_json::to_value(s.kind).expect("step kind serializes");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                kind.as_str().unwrap_or_default(),
                s.index,
                s.participants,
                s.attempted,
                s.colored,
                s.decolored,
                s.initially_uncolored,
                s.empty_palette_skips,
                s.iterations,
                s.rounds
            ));
        }
        out
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub state: ColoringState,
    pub decomposition: Option<Decomposition>,
    pub metrics: Option<StructuralMetrics>,
    pub good_colors: Option<GoodColorDiag>,
    pub dense_steps: Vec<DenseStepOutcome>,
}

/// Runs the algorithm (or the part of it `options.mode` selects) and
/// reports every step. Input problems are errors; anything that goes
/// wrong during coloring ends up in `report.invariant_failures`.
pub fn run(
    graph: &Graph,
    palettes: Vec<Vec<ColorId>>,
    options: &RunOptions,
    seed: u64,
) -> Result<RunOutcome, RunError> {
    let mut state = init_state(graph, palettes)?;
    let max_degree = graph.max_degree();
    let n = graph.n();
    let schedule = if max_degree == 0 {
        None
    } else {
        Some(match options.epsilon_override {
            Some(eps) => {
                schedule::build_schedule_with_epsilon(max_degree as f64, n, options.k, eps)?
            }
            None => schedule::build_schedule(max_degree as f64, n, options.k)?,
        })
    };
    let epsilon = match (&schedule, options.epsilon_override) {
        (Some(s), _) => s.epsilon,
        (None, Some(eps)) => eps,
        (None, None) => schedule::epsilon_for(1.0, options.k),
    };
    let main_path = schedule.as_ref().is_some_and(|s| s.main_path);
    let dense_path = match options.mode {
        Mode::FallbackOnly => false,
        Mode::Full => main_path || !options.enforce_main_path,
        Mode::DecomposeOnly | Mode::InitialOnly | Mode::DenseSteps => true,
    };

    let mut monitor = InvariantMonitor::new(options.check_invariants, &state);
    let mut outcome_steps = Vec::new();
    let mut dense_outcomes = Vec::new();
    let mut rounds_used = 0;
    let mut decomp = None;
    let mut metrics = None;
    let mut good_colors = None;
    let mut fallback_exhausted = false;

    'phases: {
        if dense_path {
            let d = decomposition::decompose(graph, epsilon)?;
            rounds_used += DECOMPOSITION_ROUNDS;
            let m = decomposition::structural_metrics(graph, &d, None);
            for violation in m.violations(epsilon, max_degree) {
                monitor.record("decomposition", violation);
            }
            decomp = Some(d);
            metrics = Some(m);
            if options.mode == Mode::DecomposeOnly {
                break 'phases;
            }
            let d = decomp.as_ref().expect("decomposition was just computed");

            let Ok(mut stats) = initial_coloring_step(graph, &mut state, seed, &mut monitor) else {
                break 'phases;
            };
            stats.record_sparse_surplus(&state, Some(d));
            rounds_used += stats.rounds;
            outcome_steps.push(stats);
            let diag = count_good_colors(graph, &state);
            for v in diag.violations() {
                monitor.record(
                    "good colors",
                    format!(
                        "vertex {v}: S_0 = {} < |J| = {}",
                        diag.surplus[v], diag.good[v]
                    ),
                );
            }
            good_colors = Some(diag);
            if options.mode == Mode::InitialOnly {
                break 'phases;
            }

            let steps = schedule.as_ref().map_or(0, ScheduleParams::dense_steps);
            for i in 1..=steps {
                let sched = schedule.as_ref().expect("steps > 0 implies a schedule");
                let gamma = sched.rounds[i]
                    .gamma
                    .expect("rounds after the first carry gamma");
                if !(0.0..=1.0).contains(&gamma) {
                    break;
                }
                let params = &sched.rounds[i - 1];
                let mut outcome =
                    match dense_coloring_step(graph, &mut state, d, gamma, seed, i, &mut monitor) {
                        Ok(o) => o,
                        Err(RunError::BadGamma(g)) => return Err(RunError::BadGamma(g)),
                        Err(_) => break 'phases,
                    };
                for (leader, color) in duplicate_prefix_colors(&outcome.cliques) {
                    monitor.record(
                        &format!("dense step {i}"),
                        format!("clique led by {leader} drew color {color} twice"),
                    );
                }
                let floor = check_palette_floor(params, &outcome.cliques);
                for violation in &floor.violations {
                    monitor.record(&format!("dense step {i}"), violation);
                }
                outcome.stats.dense = Some(DenseStepDetail {
                    gamma,
                    regular: params.regular,
                    d: Some(params.d),
                    z: Some(params.z),
                    delta: Some(params.delta),
                    floor_checked: floor.checked,
                    floor_hypothesis_unmet: floor.hypothesis_unmet,
                });
                outcome.stats.record_sparse_surplus(&state, Some(d));
                rounds_used += outcome.stats.rounds;
                outcome_steps.push(outcome.stats.clone());
                dense_outcomes.push(outcome);
            }
            if options.mode == Mode::DenseSteps {
                break 'phases;
            }

            let sparse: Vec<bool> = graph.vertices().map(|v| !d.is_dense(v)).collect();
            let Ok(mut fb) = fallback_coloring(
                graph,
                &mut state,
                Some(&sparse),
                StepKind::FallbackSparse,
                seed,
                options.max_fallback_iters,
                &mut monitor,
            ) else {
                break 'phases;
            };
            fb.stats.record_sparse_surplus(&state, Some(d));
            rounds_used += fb.stats.rounds;
            fallback_exhausted |= fb.exhausted;
            outcome_steps.push(fb.stats);
        }

        let Ok(mut fb) = fallback_coloring(
            graph,
            &mut state,
            None,
            StepKind::FallbackResidual,
            seed,
            options.max_fallback_iters,
            &mut monitor,
        ) else {
            break 'phases;
        };
        fb.stats.record_sparse_surplus(&state, decomp.as_ref());
        rounds_used += fb.stats.rounds;
        fallback_exhausted |= fb.exhausted;
        outcome_steps.push(fb.stats);
    }

    if fallback_exhausted {
        monitor.record(
            "fallback",
            format!(
                "{} vertices still uncolored after {} iterations",
                state.uncolored_count(),
                options.max_fallback_iters
            ),
        );
    }
    for violation in state.check_consistency(graph) {
        monitor.record("final state", violation);
    }

    let report = RunReport {
        seed,
        n,
        delta: max_degree,
        epsilon,
        k: options.k,
        mode: options.mode,
        main_path,
        dense_path_taken: dense_path,
        rounds_used,
        colored: n - state.uncolored_count(),
        complete: state.uncolored_count() == 0,
        fallback_exhausted,
        oversized_palettes: state.has_oversized_palettes(),
        commits_checked: monitor.commits_checked(),
        steps: outcome_steps,
        invariant_failures: monitor.failures().to_vec(),
        decomposition: decomp.as_ref().map(|d| DecompositionSummary {
            sparse: d.sparse().len(),
            cliques: d.cliques().len(),
            largest_clique: d
                .cliques()
                .iter()
                .map(|c| c.members.len())
                .max()
                .unwrap_or(0),
        }),
        good_colors: good_colors.as_ref().map(|g| GoodColorSummary {
            vertices: g.good.len(),
            max_good: g.good.iter().copied().max().unwrap_or(0),
            violations: g.violations().len(),
        }),
        schedule,
    };
    Ok(RunOutcome {
        report,
        state,
        decomposition: decomp,
        metrics,
        good_colors,
        dense_steps: dense_outcomes,
    })
}

/// Checks that `coloring` is a complete proper coloring drawn from each
/// vertex's own palette. Returns one message per problem.
pub fn verify_coloring(
    graph: &Graph,
    palettes: &[Vec<ColorId>],
    coloring: &[ColorId],
) -> Vec<String> {
    let mut problems = Vec::new();
    if coloring.len() != graph.n() || palettes.len() != graph.n() {
        problems.push(format!(
            "graph has {} vertices, coloring {} and palettes {}",
            graph.n(),
            coloring.len(),
            palettes.len()
        ));
        return problems;
    }
    for v in graph.vertices() {
        let c = coloring[v];
        if c.is_blank() {
            problems.push(format!("vertex {v} is uncolored"));
        } else if !palettes[v].contains(&c) {
            problems.push(format!("vertex {v} has color {c} outside its palette"));
        }
    }
    for (u, v) in graph.edges() {
        if !coloring[u].is_blank() && coloring[u] == coloring[v] {
            problems.push(format!("edge {u}-{v} is monochromatic ({})", coloring[u]));
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, GeneratorSpec};
    use crate::palette::canonical_palettes;

    fn colors(cs: &[u32]) -> Vec<ColorId> {
        cs.iter().copied().map(ColorId).collect()
    }

    fn fresh(graph: &Graph) -> ColoringState {
        init_state(graph, canonical_palettes(graph)).unwrap()
    }

    #[test]
    fn initial_conflicts_decolor_both_endpoints() {
        let g = Graph::from_edge_list([(0, 1), (1, 2)]).unwrap();
        let mut s = fresh(&g);
        let mut mon = InvariantMonitor::new(true, &s);
        let stats = apply_initial_tentative(&g, &mut s, &colors(&[1, 1, 2]), &mut mon).unwrap();
        assert_eq!(s.committed(0), ColorId::BLANK);
        assert_eq!(s.committed(1), ColorId::BLANK);
        assert_eq!(s.committed(2), ColorId(2));
        assert_eq!(stats.decolored, 2);
        assert_eq!(stats.colored, 1);
        assert!(mon.failures().is_empty());
        assert!(s.snapshot().is_some());
    }

    #[test]
    fn all_blank_initial_step_changes_nothing() {
        let g = generate(&GeneratorSpec::Complete { n: 5 }).unwrap();
        let mut s = fresh(&g);
        let mut mon = InvariantMonitor::new(true, &s);
        let stats = apply_initial_tentative(&g, &mut s, &[ColorId::BLANK; 5], &mut mon).unwrap();
        assert_eq!(stats.colored, 0);
        assert_eq!(s.uncolored_count(), 5);
        let snap = s.snapshot().unwrap();
        assert!(g.vertices().all(|v| snap.surplus(v) == 1));
    }

    #[test]
    fn single_clique_prefix_commits_distinct_colors() {
        let g = generate(&GeneratorSpec::Complete { n: 10 }).unwrap();
        let d = decomposition::decompose(&g, 0.15).unwrap();
        for seed in 0..20 {
            let mut s = fresh(&g);
            let mut mon = InvariantMonitor::new(true, &s);
            let out = dense_coloring_step(&g, &mut s, &d, 0.5, seed, 1, &mut mon).unwrap();
            assert_eq!(out.cliques[0].prefix_len, 5);
            assert_eq!(out.stats.colored, 5);
            assert_eq!(out.stats.decolored, 0);
            assert_eq!(out.stats.initially_uncolored, 5);
            let mut used: Vec<_> = s.coloring().iter().filter(|c| !c.is_blank()).collect();
            used.sort();
            used.dedup();
            assert_eq!(used.len(), 5);
            assert!(mon.failures().is_empty());
        }
    }

    #[test]
    fn smaller_leader_wins_cross_clique_conflict() {
        let g = generate(&GeneratorSpec::CliqueChain { size: 21, count: 2 }).unwrap();
        let d = decomposition::decompose(&g, 0.1).unwrap();
        let mut s = fresh(&g);
        let mut mon = InvariantMonitor::new(true, &s);
        let mut tentative = vec![ColorId::BLANK; g.n()];
        tentative[20] = ColorId(7); // in the clique led by 0
        tentative[21] = ColorId(7); // in the clique led by 21
        let out = apply_dense_tentative(&g, &mut s, &d, &tentative, &mut mon).unwrap();
        assert_eq!(s.committed(20), ColorId(7));
        assert_eq!(s.committed(21), ColorId::BLANK);
        assert_eq!(out.cliques[1].decolored, vec![21]);
        assert_eq!(out.stats.decolored, 1);
    }

    #[test]
    fn sparse_neighbors_never_decolor() {
        // A pendant vertex hanging off a K_12: vertex 12 is sparse.
        let mut edges: Vec<_> = (0..12)
            .flat_map(|u| (u + 1..12).map(move |v| (u, v)))
            .collect();
        edges.push((11, 12));
        let g = Graph::from_edges(13, edges).unwrap();
        let d = decomposition::decompose(&g, 0.19).unwrap();
        assert!(!d.is_dense(12));
        assert!(d.is_dense(11));
        let mut s = fresh(&g);
        let mut mon = InvariantMonitor::new(true, &s);
        let mut tentative = vec![ColorId::BLANK; 13];
        tentative[11] = ColorId(3);
        tentative[12] = ColorId(3);
        apply_dense_tentative(&g, &mut s, &d, &tentative, &mut mon).unwrap();
        assert_eq!(s.committed(11), ColorId(3));
        assert_eq!(s.committed(12), ColorId::BLANK);
    }

    #[test]
    fn zero_gamma_colors_nothing() {
        let g = generate(&GeneratorSpec::Complete { n: 8 }).unwrap();
        let d = decomposition::decompose(&g, 0.1).unwrap();
        let mut s = fresh(&g);
        let mut mon = InvariantMonitor::new(true, &s);
        let out = dense_coloring_step(&g, &mut s, &d, 0.0, 1, 1, &mut mon).unwrap();
        assert_eq!(out.stats.colored, 0);
        assert_eq!(out.stats.attempted, 0);
        assert!(dense_coloring_step(&g, &mut s, &d, 1.5, 1, 1, &mut mon).is_err());
    }

    #[test]
    fn prefix_length_rounding() {
        assert_eq!(prefix_len(10, 0.5), 5);
        assert_eq!(prefix_len(10, 0.51), 6);
        assert_eq!(prefix_len(50, 0.6), 30);
        assert_eq!(prefix_len(7, 1.0), 7);
        assert_eq!(prefix_len(7, 0.0), 0);
    }

    #[test]
    fn good_color_examples() {
        // Vertex 0 with neighbors 1, 2, 3.
        let g = Graph::from_edge_list([(0, 1), (0, 2), (0, 3)]).unwrap();
        let palettes = vec![
            colors(&[1, 2, 3, 4]),
            colors(&[1, 2, 5, 6]),
            colors(&[1, 2, 7, 8]),
            colors(&[9, 10, 11, 12]),
        ];
        let mut s = init_state(&g, palettes).unwrap();
        let diag = count_good_colors(&g, &s);
        assert_eq!(diag.good[0], 0);
        assert_eq!(diag.surplus[0], 1);
        assert_eq!(diag.surplus[1], 3);

        let mut mon = InvariantMonitor::new(true, &s);
        apply_initial_tentative(&g, &mut s, &colors(&[0, 1, 1, 9]), &mut mon).unwrap();
        let diag = count_good_colors(&g, &s);
        // Color 1 twice and inside Pal(0); color 9 once and outside it.
        assert_eq!(diag.good[0], 2);
        assert_eq!(diag.surplus[0], s.surplus(0));
        assert!(diag.surplus[0] >= 2);
        assert!(diag.violations().is_empty());
    }

    #[test]
    fn one_neighbor_inside_palette_is_not_good() {
        let g = Graph::from_edge_list([(0, 1)]).unwrap();
        let mut s = fresh(&g);
        let mut mon = InvariantMonitor::new(true, &s);
        apply_initial_tentative(&g, &mut s, &colors(&[0, 2]), &mut mon).unwrap();
        assert_eq!(count_good_colors(&g, &s).good[0], 0);
    }

    #[test]
    fn fallback_single_vertex() {
        let g = Graph::from_edges(1, []).unwrap();
        let mut s = init_state(&g, vec![colors(&[5])]).unwrap();
        let mut mon = InvariantMonitor::new(true, &s);
        let out = fallback_coloring(
            &g,
            &mut s,
            None,
            StepKind::FallbackResidual,
            0,
            10,
            &mut mon,
        )
        .unwrap();
        assert_eq!(s.committed(0), ColorId(5));
        assert_eq!(out.stats.iterations, 1);
        assert!(!out.exhausted);
    }

    #[test]
    fn fallback_on_empty_residual_is_noop() {
        let g = Graph::from_edge_list([(0, 1)]).unwrap();
        let mut s = fresh(&g);
        s.commit_colors(&g, &[(0, ColorId(1)), (1, ColorId(2))])
            .unwrap();
        let mut mon = InvariantMonitor::new(true, &s);
        let out = fallback_coloring(
            &g,
            &mut s,
            None,
            StepKind::FallbackResidual,
            0,
            10,
            &mut mon,
        )
        .unwrap();
        assert_eq!(out.stats.iterations, 0);
        assert!(!out.exhausted);
    }

    #[test]
    fn fallback_k2_terminates() {
        let g = Graph::from_edge_list([(0, 1)]).unwrap();
        for seed in 0..50 {
            let mut s = fresh(&g);
            let mut mon = InvariantMonitor::new(true, &s);
            let out = fallback_coloring(
                &g,
                &mut s,
                None,
                StepKind::FallbackResidual,
                seed,
                200,
                &mut mon,
            )
            .unwrap();
            assert!(!out.exhausted);
            assert_ne!(s.committed(0), s.committed(1));
        }
    }

    #[test]
    fn fallback_exhaustion_is_reported() {
        let g = generate(&GeneratorSpec::Complete { n: 30 }).unwrap();
        let mut s = fresh(&g);
        let mut mon = InvariantMonitor::new(true, &s);
        let out = fallback_coloring(&g, &mut s, None, StepKind::FallbackResidual, 3, 1, &mut mon)
            .unwrap();
        assert!(out.exhausted);
        assert_eq!(out.stats.iterations, 1);
    }

    #[test]
    fn run_triangle_and_cycle() {
        for (g, seed) in [
            (generate(&GeneratorSpec::Complete { n: 3 }).unwrap(), 1),
            (
                Graph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5))).unwrap(),
                2,
            ),
        ] {
            let out = run(&g, canonical_palettes(&g), &RunOptions::default(), seed).unwrap();
            assert!(out.report.success(), "{:?}", out.report.invariant_failures);
            assert!(out.report.rounds_used >= 1);
            assert!(!out.report.main_path);
            assert!(verify_coloring(&g, &canonical_palettes(&g), out.state.coloring()).is_empty());
            let colored: usize = out.report.steps.iter().map(|s| s.colored).sum();
            assert_eq!(colored, g.n());
        }
    }

    #[test]
    fn run_edgeless_graph() {
        let g = Graph::from_edges(4, []).unwrap();
        let out = run(&g, canonical_palettes(&g), &RunOptions::default(), 0).unwrap();
        assert!(out.report.success());
        assert!(out.report.schedule.is_none());
    }

    #[test]
    fn forced_dense_path_runs_every_phase() {
        let g = generate(&GeneratorSpec::CliqueChain { size: 40, count: 3 }).unwrap();
        let options = RunOptions {
            k: 1.0,
            epsilon_override: Some(0.05),
            enforce_main_path: false,
            ..RunOptions::default()
        };
        let out = run(&g, canonical_palettes(&g), &options, 11).unwrap();
        assert!(out.report.success(), "{:?}", out.report.invariant_failures);
        assert!(out.report.dense_path_taken);
        let step_rounds: usize = out.report.steps.iter().map(|s| s.rounds).sum();
        assert_eq!(out.report.rounds_used, DECOMPOSITION_ROUNDS + step_rounds);
        let kinds: Vec<StepKind> = out.report.steps.iter().map(|s| s.kind).collect();
        assert_eq!(kinds[0], StepKind::Initial);
        assert!(kinds.ends_with(&[StepKind::FallbackSparse, StepKind::FallbackResidual]));
        let colored: usize = out.report.steps.iter().map(|s| s.colored).sum();
        assert_eq!(colored, g.n());
    }

    #[test]
    fn report_is_deterministic() {
        let g = generate(&GeneratorSpec::Gnp {
            n: 80,
            p: 0.3,
            seed: 5,
        })
        .unwrap();
        let a = run(&g, canonical_palettes(&g), &RunOptions::default(), 9).unwrap();
        let b = run(&g, canonical_palettes(&g), &RunOptions::default(), 9).unwrap();
        assert_eq!(
            serde_json::to_string(&a.report).unwrap(),
            serde_json::to_string(&b.report).unwrap()
        );
        assert_eq!(a.state.coloring(), b.state.coloring());
    }

    #[test]
    fn verify_catches_problems() {
        let g = Graph::from_edge_list([(0, 1)]).unwrap();
        let pal = canonical_palettes(&g);
        assert!(verify_coloring(&g, &pal, &colors(&[1, 2])).is_empty());
        assert_eq!(verify_coloring(&g, &pal, &colors(&[1, 1])).len(), 1);
        assert_eq!(verify_coloring(&g, &pal, &colors(&[0, 9])).len(), 2);
        assert_eq!(verify_coloring(&g, &pal, &colors(&[1])).len(), 1);
    }
}
