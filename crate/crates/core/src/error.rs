use core::fmt;

use crate::{TrackId, UserId};

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptyLog,
    InvalidFraction(f64),
    InvalidMinEvents,
    UnknownFunction(alloc::string::String),
    UnknownMode(alloc::string::String),
    UnknownCriterion(alloc::string::String),
    UnknownDenominator(alloc::string::String),
    UnknownFilter(alloc::string::String),
    /// Summary table does not cover the same (user, track) pairs as the log.
    InconsistentInputs {
        log_pairs: usize,
        table_pairs: usize,
    },
    NonBinaryMatrix {
        user: UserId,
        track: TrackId,
        value: f64,
    },
    NegativeCounts {
        user: UserId,
        track: TrackId,
        value: f64,
    },
    InvalidNeighborhood,
    InvalidHyperparameter(&'static str),
    EmptyRatings,
    UnknownUser(UserId),
    MissingClass(crate::classify::Label),
    ZeroDenominator,
    NoEvaluableUsers,
    InvalidRank,
    InvalidConfig(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyLog => write!(f, "event log is empty"),
            Error::InvalidFraction(v) => write!(f, "fraction {v} must lie strictly between 0 and 1"),
            Error::InvalidMinEvents => write!(f, "minimum activity must be at least 1 event"),
            Error::UnknownFunction(s) => write!(f, "unknown rating function `{s}` (expected f1, f2 or f3)"),
            Error::UnknownMode(s) => write!(f, "unknown training input mode `{s}`"),
            Error::UnknownCriterion(s) => write!(f, "unknown relevance criterion `{s}`"),
            Error::UnknownDenominator(s) => write!(f, "unknown denominator mode `{s}`"),
            Error::UnknownFilter(s) => write!(f, "unknown filter `{s}`"),
            Error::InconsistentInputs { log_pairs, table_pairs } => write!(
                f,
                "summary table has {table_pairs} pairs but the log has {log_pairs}; table was not derived from this log"
            ),
            Error::NonBinaryMatrix { user, track, value } => {
                write!(f, "matrix entry ({user}, {track}) = {value} is not binary")
            }
            Error::NegativeCounts { user, track, value } => {
                write!(f, "matrix entry ({user}, {track}) = {value} is negative")
            }
            Error::InvalidNeighborhood => write!(f, "neighborhood size must be at least 1"),
            Error::InvalidHyperparameter(name) => write!(f, "invalid hyperparameter `{name}`"),
            Error::EmptyRatings => write!(f, "no ratings to train on"),
            Error::UnknownUser(u) => write!(f, "user {u} is not known to the model"),
            Error::MissingClass(c) => write!(f, "no training samples for class {c}"),
            Error::ZeroDenominator => write!(f, "average precision denominator is zero"),
            Error::NoEvaluableUsers => write!(f, "no user has a non-empty relevance set"),
            Error::InvalidRank => write!(f, "rank cutoff must be at least 1"),
            Error::InvalidConfig(what) => write!(f, "invalid generator configuration: {what}"),
        }
    }
}

impl core::error::Error for Error {}
