use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("absolute continuity violated at symbol {index}: p = {p}, q = 0")]
    AbsoluteContinuityViolated { index: usize, p: f64 },

    #[error("markov chain is not ergodic: {0}")]
    NotErgodic(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("capacity iteration did not converge; best bracket [{}, {}]", .0.lower_bound, .0.upper_bound)]
    CapacityNotConverged(Box<crate::channels::CapacityResult>),

    #[error("enumeration of {size} sequences exceeds the cap of {cap}")]
    EnumerationTooLarge { size: f64, cap: u64 },

    #[error("insufficient rate: {needed} points needed, embedding space holds 2^{available_bits}")]
    InsufficientRate { needed: u64, available_bits: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("class {0} has no members")]
    EmptyClass(String),

    #[error("class means are degenerate: |mu_{class}| = {norm:e}")]
    DegenerateMeans { class: usize, norm: f64 },

    #[error("regression targets missing")]
    MissingTargets,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid inputs: {0}")]
    InvalidInputs(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
