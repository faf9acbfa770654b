use thiserror::Error;

/// A single configuration complaint, tagged with the dotted path of the
/// offending field so callers can report every violation at once.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Precondition or invariant violation on an operation input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A grid or series arrived in the wrong unit system.
    #[error("unit mismatch: expected {expected}, found {found}")]
    UnitMismatch { expected: String, found: String },

    /// A requested time lies outside the span of the trace that must supply it.
    #[error("outside span: {0}")]
    OutsideSpan(String),

    /// Convolution operands disagree on the sampling step.
    #[error("mismatched sampling step: {left} vs {right}")]
    MismatchedStep { left: f64, right: f64 },

    /// The two-exponential plasma form degenerates when T1 = T2.
    #[error("confluent time constants: T1 = {t1}, T2 = {t2}")]
    ConfluentPoles { t1: f64, t2: f64 },

    /// Partial-fraction cascade requires pairwise-distinct pole rates.
    #[error("coincident pole rates: {0}")]
    CoincidentPoles(String),

    /// A NaN or infinity appeared where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// One message per violated config field.
    #[error("invalid configuration ({} issue(s))", .0.len())]
    Config(Vec<ConfigIssue>),

    #[error("malformed JSON: {0}")]
    Json(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Process exit code contract: 2 config/usage, 3 numeric failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFinite(_) => 3,
            Error::Io(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
