use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("{method} did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    LinearNonConvergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("matrix is singular (zero pivot at row {row})")]
    Singular { row: usize },

    #[error("eigenvalue iteration broke down: {0}")]
    EigenBreakdown(String),

    #[error("Newton iteration failed on slab {slab}: residual history {history:?}")]
    NewtonDivergence { slab: usize, history: Vec<f64> },

    #[error("slab {slab}: {source}")]
    Slab {
        slab: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Short machine-readable kind, used in structured CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Unsupported(_) => "unsupported",
            Error::LinearNonConvergence { .. } => "linear_non_convergence",
            Error::Singular { .. } => "singular_matrix",
            Error::EigenBreakdown(_) => "eigen_breakdown",
            Error::NewtonDivergence { .. } => "newton_divergence",
            Error::Slab { source, .. } => source.kind(),
            Error::NonFinite(_) => "non_finite",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
