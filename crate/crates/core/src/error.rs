use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("weight solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("at tree path {path:?}: {source}")]
    AtPath {
        path: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("size guard: {0}")]
    TooLarge(String),

    #[error("internal verification failed: {0}")]
    Verification(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Solver failures keep their residual through path annotation.
    pub fn residual(&self) -> Option<f64> {
        match self {
            Error::NonConvergence { residual, .. } => Some(*residual),
            Error::AtPath { source, .. } => source.residual(),
            _ => None,
        }
    }

    pub(crate) fn at(self, slot: usize) -> Error {
        match self {
            Error::AtPath { mut path, source } => {
                path.insert(0, slot);
                Error::AtPath { path, source }
            }
            other => Error::AtPath { path: vec![slot], source: Box::new(other) },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
