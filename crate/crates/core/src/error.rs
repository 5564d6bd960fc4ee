use alloc::string::String;
use core::fmt;

/// Errors raised by the core library.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Vector or matrix sizes do not agree.
    DimensionMismatch { expected: usize, found: usize },
    /// A matrix violates the group constraint beyond tolerance.
    NotInGroup { residual: f64 },
    /// A group model description is inconsistent.
    InvalidModel(String),
    /// A function that should be conjugation invariant is not.
    NotInvariant { defect: f64 },
    /// Malformed pattern text.
    Parse { line: usize, message: String },
    /// A gluing pattern violates a structural rule.
    InvalidPattern(String),
    /// A letter name is not known to the pattern or chart.
    UnknownLetter(String),
    /// Index out of range or otherwise invalid argument.
    InvalidArgument(String),
    /// No acyclic elimination order exists for the requested letters.
    Elimination(String),
    /// A polygon relation fails at the given point.
    RelationViolated { polygon: usize, residual: f64 },
    /// A linear solve returned a residual above tolerance.
    Solve { residual: f64 },
    /// A substitution failed to invert on sampled points.
    NotInvertible { defect: f64 },
    /// A point fails a precondition (regularity, composability, ...).
    Precondition(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotInGroup { residual } => {
                write!(f, "matrix is not a group element (constraint residual {residual:e})")
            }
            Error::InvalidModel(m) => write!(f, "invalid group model: {m}"),
            Error::NotInvariant { defect } => {
                write!(f, "function is not conjugation invariant (defect {defect:e})")
            }
            Error::Parse { line, message } => write!(f, "line {line}: {message}"),
            Error::InvalidPattern(m) => write!(f, "invalid gluing pattern: {m}"),
            Error::UnknownLetter(l) => write!(f, "unknown letter `{l}`"),
            Error::InvalidArgument(m) => write!(f, "invalid argument: {m}"),
            Error::Elimination(m) => write!(f, "no acyclic elimination: {m}"),
            Error::RelationViolated { polygon, residual } => {
                write!(f, "relation of polygon {polygon} violated (residual {residual:e})")
            }
            Error::Solve { residual } => write!(f, "linear solve residual {residual:e} above tolerance"),
            Error::NotInvertible { defect } => {
                write!(f, "substitution does not round-trip (defect {defect:e})")
            }
            Error::Precondition(m) => write!(f, "precondition failed: {m}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
