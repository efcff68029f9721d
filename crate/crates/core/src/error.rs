use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, MkcError>;

#[derive(Debug, Error)]
pub enum MkcError {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("singular linear system{}", if *.suggest_regularization { " (use a positive regularization parameter)" } else { "" })]
    Singular { suggest_regularization: bool },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("iteration diverged at step {iteration}: objective is not finite")]
    Divergence { iteration: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
}

impl MkcError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MkcError::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether this error comes from numerics rather than from IO or usage.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            MkcError::Singular { .. }
                | MkcError::Divergence { .. }
                | MkcError::NonFinite(_)
                | MkcError::Degenerate(_)
        )
    }
}

pub(crate) fn ensure_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(MkcError::NonFinite(what))
    }
}
