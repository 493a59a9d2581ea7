//! Error type shared across the crate.

use core::fmt;

/// Everything that can go wrong when driving the toolkit with valid code
/// but invalid data or exhausted resources.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A point fell outside the closed unit cube.
    DomainViolation { coordinate: f64 },
    /// A query (or batch of queries) would exceed the oracle budget.
    BudgetExhausted { budget: u64, requested: u64 },
    /// The objective produced NaN or an infinity at a queried point.
    NonFiniteResponse,
    /// A point's dimension does not match the expected dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// A volume exponent outside its admissible range.
    InvalidBeta { beta: f64 },
    /// A constructor or configuration parameter failed validation.
    InvalidParameter(&'static str),
    /// An operation needed a nonempty point set.
    EmptySet,
    /// The level set cannot hold the requested number of disjoint boxes.
    PackingTooSmall { requested: usize, found: usize },
    /// No reference minimum could be computed (non-finite objective).
    NoMinimum,
    /// `predict` was called on a fit flagged unusable.
    UnusableFit,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DomainViolation { coordinate } => {
                write!(f, "point coordinate {coordinate} lies outside [0, 1]")
            }
            Error::BudgetExhausted { budget, requested } => {
                write!(f, "query budget {budget} cannot cover {requested} more queries")
            }
            Error::NonFiniteResponse => write!(f, "objective returned a non-finite value"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "expected a point of dimension {expected}, got {got}")
            }
            Error::InvalidBeta { beta } => write!(f, "volume exponent beta={beta} out of range"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::EmptySet => write!(f, "operation requires a nonempty point set"),
            Error::PackingTooSmall { requested, found } => {
                write!(f, "level set admits only {found} of {requested} requested boxes")
            }
            Error::NoMinimum => write!(f, "no finite reference minimum available"),
            Error::UnusableFit => write!(f, "fit is unusable (empty or degenerate window)"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
