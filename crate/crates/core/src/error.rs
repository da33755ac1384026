use thiserror::Error;

/// Errors raised by the analysis primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("total mass is zero; cannot derive probabilities")]
    ZeroMass,

    #[error("invalid tensor: {0}")]
    InvalidTensor(String),

    #[error("distribution does not sum to 1 (sum = {0})")]
    NotNormalized(f64),

    #[error("unknown axis `{0}`")]
    UnknownAxis(String),

    #[error("axis mismatch: {0}")]
    AxisMismatch(String),

    #[error("grouping has no level {requested} (depth {depth})")]
    BadDepth { requested: usize, depth: usize },

    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("support violation at cell {cell}: posterior {q} > 0 but prior is 0")]
    SupportViolation { cell: String, q: f64 },

    #[error("expected a distribution over {expected} axes, got {actual}")]
    WrongArity { expected: usize, actual: usize },

    #[error("entropy must be non-negative, got {0}")]
    NegativeEntropy(f64),

    #[error("series needs at least {needed} distributions, got {actual}")]
    SeriesTooShort { needed: usize, actual: usize },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("slice `{0}` has fewer than the required present nodes")]
    EmptySlice(String),

    #[error("slice `{label}`: {source}")]
    InSlice {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid distance matrix: {0}")]
    InvalidDistances(String),

    #[error("invalid edge weight {weight} for transform {transform}")]
    InvalidWeight { weight: f64, transform: &'static str },

    #[error("no position for node {0}")]
    MissingPosition(String),

    #[error("empty series")]
    EmptySeries,

    #[error("invalid layout configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
