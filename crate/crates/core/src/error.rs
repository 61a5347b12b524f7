//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A comparison record failed validation against its host graph.
    #[error("invalid record #{index}: ({i}, {j}, {value}): {reason}")]
    InvalidRecord {
        index: usize,
        i: usize,
        j: usize,
        value: f64,
        reason: String,
    },

    /// The graph is disconnected, so the global score is not unique.
    /// `component_of[v]` labels the component containing vertex `v`.
    #[error("graph is disconnected ({num_components} components)")]
    Disconnected {
        num_components: usize,
        component_of: Vec<usize>,
    },

    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// An edge budget is infeasible for the requested scheme.
    #[error("invalid edge budget m = {m} for scheme {scheme} on n = {n} vertices: {reason}")]
    Budget {
        scheme: &'static str,
        n: usize,
        m: usize,
        reason: String,
    },

    /// A row of an input file failed to parse.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: u64, reason: String },

    #[error("mismatched vector lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    InvalidInput(String),
}

impl Error {
    /// Short machine-parsable code, used as the CLI error prefix.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidRecord { .. } => "invalid-record",
            Error::Disconnected { .. } => "disconnected",
            Error::Domain { .. } => "domain",
            Error::Budget { .. } => "budget",
            Error::Parse { .. } => "parse",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::Io(_) => "io",
            Error::InvalidInput(_) => "invalid-input",
        }
    }
}
