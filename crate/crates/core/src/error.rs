use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum KanError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid network shape {0:?}: every entry must be >= 1 and there must be at least two")]
    InvalidShape(Vec<usize>),

    /// Power iteration did not settle; `last_estimate` is the final iterate.
    #[error("spectral norm did not converge after {iterations} iterations (last estimate {last_estimate}, residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        last_estimate: f64,
        residual: f64,
    },

    #[error("degenerate knot span: {0}")]
    DegenerateKnotSpan(String),

    #[error("tape does not match the network: {0}")]
    StaleTape(String),

    #[error("normalization undefined: {0}")]
    NormalizationUndefined(String),

    #[error("bound hypothesis violated: {0}")]
    BoundHypothesis(String),

    #[error("sparsification bound not met after {resamples} resamples (best error^2 {best_sq:e} > bound {bound:e})")]
    SparsificationFailed {
        resamples: usize,
        best_sq: f64,
        bound: f64,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("loss became NaN or infinite at epoch {epoch} ({what})")]
    NanLoss { epoch: usize, what: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = KanError> = std::result::Result<T, E>;
