use thiserror::Error;

use crate::graph::VertexId;
use crate::palette::ColorId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {vertex} is out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: VertexId, n: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("expected {expected} palettes, got {got}")]
    PaletteCount { expected: usize, got: usize },
    #[error("palette of vertex {vertex} has {size} colors, needs at least {required}")]
    PaletteTooSmall {
        vertex: VertexId,
        size: usize,
        required: usize,
    },
    #[error("palette of vertex {0} contains the blank color 0")]
    BlankInPalette(VertexId),
    #[error("palette of vertex {vertex} lists color {color} twice")]
    DuplicateColor { vertex: VertexId, color: ColorId },
    #[error("invariant violated: {0}")]
    Invariant(#[from] InvariantViolation),
}

/// A broken structural guarantee. These indicate bugs, never bad luck.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvariantViolation {
    #[error("vertex {0} is out of range")]
    UnknownVertex(VertexId),
    #[error("vertex {0} is already colored")]
    AlreadyColored(VertexId),
    #[error("vertex {0} assigned twice in one commit")]
    DuplicateAssignment(VertexId),
    #[error("vertex {0} assigned the blank color")]
    BlankAssignment(VertexId),
    #[error("color {color} is not in the residual palette of vertex {vertex}")]
    ColorNotAvailable { vertex: VertexId, color: ColorId },
    #[error("edge {u}-{v} would be monochromatic with color {color}")]
    Monochromatic {
        u: VertexId,
        v: VertexId,
        color: ColorId,
    },
    #[error("surplus of vertex {vertex} dropped from {before} to {after}")]
    SurplusDecreased {
        vertex: VertexId,
        before: i64,
        after: i64,
    },
    #[error("residual bookkeeping of vertex {vertex} drifted: tracked (Q={tracked_q}, d={tracked_d}), recomputed (Q={actual_q}, d={actual_d})")]
    ResidualDrift {
        vertex: VertexId,
        tracked_q: usize,
        tracked_d: usize,
        actual_q: usize,
        actual_d: usize,
    },
    #[error("vertex {vertex} colored {color}, which is not in its original palette")]
    OffPalette { vertex: VertexId, color: ColorId },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecompositionError {
    #[error("epsilon must lie in (0, 1/5), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("brute-force oracle limited to {limit} vertices, graph has {n}")]
    TooLarge { n: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("maximum degree must be at least 1")]
    ZeroDegree,
    #[error("vertex count must be at least 1")]
    ZeroVertices,
    #[error("K must be positive and finite, got {0}")]
    BadK(f64),
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("advancing requires 0 < D < Z, got D={d}, Z={z}")]
    Domain { d: f64, z: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("could not parse generator `{0}`")]
    Syntax(String),
    #[error("no sample satisfied the local-sparsity bound after {0} attempts")]
    AttemptsExhausted(usize),
}

/// Errors from a run or a single step.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("gamma must lie in [0, 1], got {0}")]
    BadGamma(f64),
    #[error(transparent)]
    Invariant(#[from] InvariantViolation),
}
