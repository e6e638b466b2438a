use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument or configuration value.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Two mode energies coincide, which signals a rationally dependent quasimomentum.
    #[error("degenerate energies {first} and {second} at modes {xi_first:?} / {xi_second:?}")]
    Degeneracy {
        first: f64,
        second: f64,
        xi_first: [i64; 3],
        xi_second: [i64; 3],
    },

    #[error("enumeration of ~{estimated} modes exceeds the budget of {budget}")]
    Capacity { estimated: usize, budget: usize },

    #[error("lambda = {lambda} lies within {distance:e} of the mode energy {energy}")]
    Pole {
        lambda: f64,
        energy: f64,
        distance: f64,
    },

    #[error("secular solver failed in gap {gap_index} ({left}, {right}): {reason}")]
    Solver {
        gap_index: usize,
        left: f64,
        right: f64,
        reason: String,
    },

    #[error("truncation set A(lambda = {lambda}, L = {width}) is empty")]
    EmptyTruncation { lambda: f64, width: f64 },

    #[error("spectrum covers energies up to {covered} but {required} is needed")]
    Coverage { required: f64, covered: f64 },

    #[error("direction {0:?} is not a unit vector")]
    Normalization([f64; 3]),

    #[error("measure has zero total mass")]
    DegenerateMeasure,

    #[error("vectors built for different configurations: {0}")]
    Configuration(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
