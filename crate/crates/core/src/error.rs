//! Error type shared by every module in the crate.

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A vector had the wrong number of coordinates.
    DimensionMismatch { expected: usize, got: usize },
    /// A point fell outside the box domain.
    OutOfBounds { dim: usize, value: f64 },
    /// An objective evaluation produced NaN or an infinity.
    RejectedEvaluation { value: f64 },
    /// An operation that needs at least one archived point got none.
    EmptyArchive,
    /// A pairwise-distance computation needs at least two points.
    DegenerateDesign,
    /// A configuration value violated its documented constraint.
    InvalidConfig(String),
    /// Cholesky factorization failed even after jitter escalation.
    IllConditionedKernel,
    /// Posterior variance came out more negative than numerical noise allows.
    NegativeVariance { value: f64 },
    /// Candidate generation produced no usable points after a retry.
    EmptyCandidates,
    /// The requested problem is not defined at this dimension.
    UnsupportedDimension { problem: &'static str, dim: usize },
    /// A name string did not match any known identifier of its kind.
    UnknownName { kind: &'static str, name: String },
    /// Policy feedback arrived without a preceding proposal.
    ProposalMissing,
    /// The policy state is missing a field its kind requires.
    PolicyState(&'static str),
    /// The operation is not defined for this policy kind.
    UnsupportedPolicy(&'static str),
    /// A step of the optimization loop failed at the given iteration.
    AtIteration { iteration: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::OutOfBounds { dim, value } => {
                write!(f, "coordinate {dim} = {value} lies outside the bounds")
            }
            Error::RejectedEvaluation { value } => {
                write!(f, "rejected non-finite evaluation: {value}")
            }
            Error::EmptyArchive => write!(f, "archive is empty"),
            Error::DegenerateDesign => write!(f, "need at least two points"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::IllConditionedKernel => {
                write!(f, "kernel matrix is not positive definite after jitter escalation")
            }
            Error::NegativeVariance { value } => {
                write!(f, "posterior variance {value} is negative beyond tolerance")
            }
            Error::EmptyCandidates => write!(f, "no candidates left after exclusion"),
            Error::UnsupportedDimension { problem, dim } => {
                write!(f, "problem `{problem}` is not defined at dimension {dim}")
            }
            Error::UnknownName { kind, name } => write!(f, "unknown {kind} `{name}`"),
            Error::ProposalMissing => {
                write!(f, "policy feedback without a preceding proposal")
            }
            Error::PolicyState(msg) => write!(f, "policy state error: {msg}"),
            Error::UnsupportedPolicy(op) => {
                write!(f, "operation `{op}` is not defined for this policy kind")
            }
            Error::AtIteration { iteration, source } => {
                write!(f, "iteration {iteration}: {source}")
            }
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::AtIteration { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
