use std::path::PathBuf;

use thiserror::Error;

use crate::ledger::Violation;
use crate::money::Money;
use crate::reconstruction::Certificate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Infeasible,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 2,
            ErrorKind::Data => 3,
            ErrorKind::Infeasible => 4,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            ErrorKind::Usage => "E_USAGE",
            ErrorKind::Data => "E_DATA",
            ErrorKind::Infeasible => "E_INFEASIBLE",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("payer and payee are the same participant (index {0})")]
    SelfPayment(usize),

    #[error("amount must be strictly positive, got {0} cents")]
    NonPositiveAmount(Money),

    #[error("participant index {index} out of range for n = {n}")]
    ParticipantOutOfRange { index: usize, n: usize },

    #[error("unknown participant label `{0}`")]
    UnknownParticipant(String),

    #[error("duplicate participant label `{0}`")]
    DuplicateParticipant(String),

    #[error("at least {min} participants required, got {n}")]
    TooFewParticipants { n: usize, min: usize },

    #[error("dimension mismatch: expected {expected} participants, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not skew-symmetric with zero diagonal ({} violation(s), first: {})", .0.len(), .0[0])]
    InvalidMatrix(Vec<Violation>),

    #[error("payment #{position} rejected: {source}")]
    Payment {
        position: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("payment #{position} is dated day {found}, netting day is {expected}")]
    DayMismatch {
        position: usize,
        expected: u32,
        found: u32,
    },

    #[error("aggregate balances sum to {0} cents instead of zero")]
    InfeasibleReport(Money),

    #[error("inconsistent constraints: {0}")]
    InconsistentConstraints(String),

    #[error("no bilateral matrix satisfies the constraints: {0}")]
    Unsatisfiable(Certificate),

    #[error("enumeration supports at most 4 participants, got {0}")]
    EnumerationTooWide(usize),

    #[error("enumeration would visit ~{estimate} candidates, budget is {budget}")]
    EnumerationBudget { estimate: u128, budget: u128 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("event at day {day} follows day {previous}; events must be chronological")]
    EventsOutOfOrder { day: u32, previous: u32 },

    #[error("{event} rejected: {reason}")]
    EventRejected { event: String, reason: String },

    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    #[error("zero-sum violation on {date}: balances sum to {sum} cents (slack {slack})")]
    ZeroSumViolation {
        date: String,
        sum: Money,
        slack: Money,
    },

    #[error("unknown strategem `{0}`")]
    UnknownStrategem(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("digest mismatch for {}", .0.display())]
    DigestMismatch(PathBuf),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Unsatisfiable(_) | Error::InfeasibleReport(_) => ErrorKind::Infeasible,
            Error::UnknownStrategem(_) | Error::InvalidParameter { .. } => ErrorKind::Usage,
            Error::Payment { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
