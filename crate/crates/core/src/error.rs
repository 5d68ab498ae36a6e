use std::path::PathBuf;

use crate::model::Variable;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library reports.
///
/// Variants split into validation problems (bad data, bad configuration,
/// unmet preconditions) and environment problems (file system). The CLI maps
/// the former to exit code 2 and the latter to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: String,
        message: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{name} = {value} is out of range: {bound}")]
    Range {
        name: String,
        value: String,
        bound: String,
    },

    #[error("invalid dataset: {0}")]
    Invalid(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("dataset not complete: record {record}, {variable} is missing")]
    NotComplete { record: usize, variable: Variable },

    #[error("mask plan references record {record}, {variable}, which is absent or unobserved")]
    PlanCell { record: usize, variable: Variable },

    #[error("unknown imputation method `{0}`; valid methods: previous, next, knn, mice, missforest, linear_regression")]
    UnknownMethod(String),

    #[error("insufficient donors for record {record}, {variable}: need {needed}, have {available}")]
    InsufficientDonors {
        record: usize,
        variable: Variable,
        needed: usize,
        available: usize,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("residual missingness in scored cell: record {record}, {variable}")]
    ResidualMissing { record: usize, variable: Variable },

    #[error("empty score set for {0}")]
    EmptyScoreSet(Variable),

    #[error("degenerate sample: all values are equal")]
    DegenerateSample,

    #[error("singular design matrix")]
    Singular,

    #[error("arbitrage-violating inputs at tenor {tenor}y: {reason}")]
    Arbitrage { tenor: f64, reason: String },

    #[error("incomplete series: {0}; run imputation first to fill the gap")]
    IncompleteSeries(String),

    #[error("instruments not sorted by maturity at position {0}")]
    Unsorted(usize),

    #[error("cash flow at {0}y falls between curve nodes")]
    OffGrid(f64),

    #[error("repetition {repetition}, method {method}: {source}")]
    Trial {
        repetition: usize,
        method: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn range(name: &str, value: impl ToString, bound: &str) -> Self {
        Error::Range {
            name: name.to_string(),
            value: value.to_string(),
            bound: bound.to_string(),
        }
    }

    /// True for failures caused by the environment rather than the input.
    pub fn is_environmental(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Trial { source, .. } => source.is_environmental(),
            _ => false,
        }
    }
}
