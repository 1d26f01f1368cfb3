use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("non-positive weight {weight} on edge ({i}, {j})")]
    NonPositiveWeight { i: String, j: String, weight: f64 },

    #[error("self-loop at node {0}")]
    SelfLoop(String),

    #[error("graph is disconnected; component sizes {0:?}")]
    Disconnected(Vec<usize>),

    #[error("node {0} is isolated")]
    IsolatedNode(usize),

    #[error("tau = {tau} is too large; the maximal admissible value is {max}")]
    TauTooLarge { tau: f64, max: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("conjugate gradient breakdown at iteration {0} (non-positive curvature)")]
    CgBreakdown(usize),

    #[error("linear system is singular")]
    Singular,

    #[error("dimension {n} exceeds the limit {limit} for this operation")]
    TooLarge { n: usize, limit: usize },

    #[error("class {0} has no labelled nodes")]
    EmptyClass(usize),

    #[error("node {node} labelled with both class {first} and class {second}")]
    ConflictingLabel {
        node: usize,
        first: usize,
        second: usize,
    },

    #[error("node {node} has no ground-truth label")]
    MissingLabel { node: String },

    #[error("unknown node {0}")]
    UnknownNode(String),

    #[error("triangle inequality violated on ({i}, {j}, {k}) by {excess:e}")]
    NotMetric {
        i: usize,
        j: usize,
        k: usize,
        excess: f64,
    },

    #[error("non-positive kernel entry at ({0}, {1})")]
    NonPositiveKernel(usize, usize),

    #[error("checksum mismatch for bundled file {0}")]
    Checksum(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
