//! Distributed (Δ+1)-list-coloring on dense graphs, simulated round by round.
//!
//! A run decomposes the graph into sparse vertices and almost-cliques, takes
//! one random initial step, then colors large fractions of every
//! almost-clique through leader-drawn random permutations. Whatever is left
//! is finished by repeated random trials.
//!
//! ```
//! use densecolor::{canonical_palettes, generate, run, GeneratorSpec, RunOptions};
//!
//! let graph = generate(&GeneratorSpec::Complete { n: 12 }).unwrap();
//! let outcome = run(&graph, canonical_palettes(&graph), &RunOptions::default(), 7).unwrap();
//! assert!(outcome.report.complete);
//! ```

pub mod decomposition;
pub mod engine;
pub mod error;
pub mod generators;
pub mod graph;
pub mod oracle;
pub mod palette;
pub mod rng;
pub mod schedule;
pub mod state;

pub use decomposition::{decompose, AlmostClique, Decomposition, StructuralMetrics};
pub use engine::{
    run, verify_coloring, Mode, RunOptions, RunOutcome, RunReport, StepKind, StepStats,
};
pub use error::{
    DecompositionError, GeneratorError, GraphError, InvariantViolation, RunError, ScheduleError,
    StateError,
};
pub use generators::{generate, GeneratorSpec};
pub use graph::{Graph, VertexId};
pub use palette::{canonical_palettes, ColorId, ResidualPalette};
pub use schedule::{build_schedule, build_schedule_with_epsilon, RoundParams, ScheduleParams};
pub use state::{init_state, ColoringState};
