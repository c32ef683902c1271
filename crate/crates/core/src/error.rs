use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("value {x} lies beyond the sequence horizon {horizon}")]
    BeyondHorizon { x: u64, horizon: u64 },
    #[error("index {index} out of range for a sequence with {len} elements")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("sequence data not strictly increasing at position {position}: {prev} then {next}")]
    NotIncreasing {
        position: usize,
        prev: u64,
        next: u64,
    },
    #[error("malformed sequence file at line {line}: {reason}")]
    MalformedFile { line: usize, reason: String },
    #[error("polynomial is not integer-valued: value at {at} is not an integer")]
    NotIntegerValued { at: u64 },
    #[error("polynomial must have positive leading coefficient and degree at least 1")]
    NonPositiveLeading,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("count overflow: {0}; try a smaller order h or a smaller n_max")]
    Overflow(String),
    #[error("element {0} is already in the sequence")]
    ElementPresent(u64),
    #[error("exact search needs {found} stored representations, above the cap {cap}")]
    OverCap { found: usize, cap: usize },
    #[error("estimation window is empty: {0}")]
    EmptyWindow(String),
    #[error("horizon {horizon} too small, need at least {needed}")]
    HorizonTooSmall { horizon: u64, needed: u64 },
    #[error("improper assignment: sum of probabilities {sum:.3} over the range is below {needed}")]
    ImproperAssignment { sum: f64, needed: f64 },
    #[error("infeasible construction parameters: {reason}{}", violation_suffix(*.first_violation))]
    Infeasible {
        reason: String,
        first_violation: Option<u64>,
    },
    #[error("target function is not positive at x = {0}")]
    NonPositiveTarget(u64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn violation_suffix(n: Option<u64>) -> String {
    n.map(|n| format!(" (first violation at n = {n})"))
        .unwrap_or_default()
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad input rather than by an internal fault.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Overflow(_) | Error::Csv(_))
    }
}
