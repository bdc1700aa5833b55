use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("pole at nonpositive integer {0}")]
    Pole(f64),

    #[error("branch error: {0}")]
    Branch(String),

    #[error("parse error in {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("zeros are not strictly increasing at line {line} ({value})")]
    Monotonicity { line: usize, value: f64 },

    #[error("pair ({x}, {y}) is not in F({j})")]
    PairNotInEnsemble { x: u64, y: u64, j: u64 },

    #[error("ensemble F({0}) is empty")]
    EmptyEnsemble(u64),

    #[error("no prime pair of {n} has pi(x)*pi(y) = {numerator}")]
    NoSolution { n: u64, numerator: u64 },

    #[error("singular Lagrange system: kappa({p1}) = kappa({p2})")]
    SingularSystem { p1: u64, p2: u64 },

    #[error("u = {u} lies beyond the parabola apex {apex}")]
    DiscriminantNegative { u: f64, apex: f64 },

    #[error("{0} does not occur as a smaller factor in the ensemble")]
    XNotPresent(u64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
