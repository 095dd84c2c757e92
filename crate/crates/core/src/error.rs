use std::path::PathBuf;

use thiserror::Error;

use crate::io::config::ConfigErrors;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is out of domain: {reason}")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The drift matrix has an eigenvalue with non-negative real part, or is
    /// too close to the stability boundary to yield a meaningful steady state.
    #[error("system is not stable: largest real part of the drift spectrum is {max_real_part:e}")]
    Unstable { max_real_part: f64 },

    #[error("numerical failure in {context}: {detail}")]
    Numerical {
        context: &'static str,
        detail: String,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error(transparent)]
    Config(#[from] ConfigErrors),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn numerical(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            context,
            detail: detail.into(),
        }
    }
}
