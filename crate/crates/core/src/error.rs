use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },

    #[error("config error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(
        "energy quadrature not converged: integrand at the grid edge is {ratio:.3e} of its peak"
    )]
    QuadratureTail { ratio: f64 },

    #[error("correlation matrix is not positive semi-definite (smallest eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("at node ({x:.4}, {y:.4}): {source}")]
    AtNode {
        x: f64,
        y: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{failed} of {total} trajectories terminated or left the field grid")]
    TooManyLost { failed: usize, total: usize },

    #[error("{outside} of {total} samples fell outside the tabulated region")]
    OutsideMap { outside: usize, total: usize },

    #[error("spin polarization undefined: total current {0:.3e} is zero")]
    UndefinedPolarization(f64),

    #[error("malformed field file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("output directory {0} is locked by another run")]
    Locked(PathBuf),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(key: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_node(self, x: f64, y: f64) -> Self {
        Error::AtNode {
            x,
            y,
            source: Box::new(self),
        }
    }
}
