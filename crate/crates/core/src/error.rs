use thiserror::Error;

/// Errors produced by the collocation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("moment E[xi^{gamma:?}] overflowed")]
    MomentOverflow { gamma: Vec<u32> },

    #[error("moment table holds order {have}, need at least {need}")]
    MomentOrder { have: u32, need: u32 },

    #[error(
        "degenerate basis at function {index} (exponents {exponents:?}): squared norm {norm_sq:e} below tolerance"
    )]
    DegenerateBasis {
        index: usize,
        exponents: Vec<u32>,
        norm_sq: f64,
    },

    #[error("orthonormality residual {residual:e} exceeds {tol:e}")]
    NotOrthonormal { residual: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("requested {requested} clusters from {available} candidates")]
    TooManyClusters { requested: usize, available: usize },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "increase phase reached {nodes} nodes (limit {limit}) without converging; best residual {residual:e}"
    )]
    IncreaseAborted {
        nodes: usize,
        limit: usize,
        residual: f64,
    },

    #[error("non-finite model value {value} at node {node}")]
    NonFiniteValue { node: usize, value: f64 },

    #[error("model evaluation failed: {0}")]
    Model(String),

    #[error("unknown builtin benchmark {0:?}")]
    UnknownBenchmark(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
