use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("infeasible assignment: {0}")]
    Infeasible(ConstraintReport),

    #[error("variable {var} labelled {left} in one model and {right} in the other")]
    LabelCollision { var: usize, left: String, right: String },

    #[error("malformed qubo file, line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate entry ({i}, {j}) on line {line}")]
    DuplicateEntry { line: usize, i: usize, j: usize },

    #[error("{what} too large: {size} > cap {cap}")]
    TooLarge { what: &'static str, size: usize, cap: usize },

    #[error("no feasible sample: {0}")]
    NoFeasible(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("unknown plot kind `{0}`")]
    UnknownKind(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable identifier, used for machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::Infeasible(_) => "infeasible",
            Error::LabelCollision { .. } => "label_collision",
            Error::Parse { .. } => "parse",
            Error::DuplicateEntry { .. } => "duplicate_entry",
            Error::TooLarge { .. } => "too_large",
            Error::NoFeasible(_) => "no_feasible",
            Error::NonFinite(_) => "non_finite",
            Error::UnknownKind(_) => "unknown_kind",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

/// A single violated network constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// GU column of the association matrix does not sum to one.
    Association { gu: usize, count: usize },
    /// UAV occupies more than one sub-channel.
    Subchannel { uav: usize, count: usize },
    /// UAV has more than one power level.
    PowerLevel { uav: usize, count: usize },
    /// A matrix has the wrong shape.
    Shape { matrix: &'static str, expected: (usize, usize), actual: (usize, usize) },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Association { gu, count } => {
                write!(f, "GU {gu} associated with {count} UAVs (need exactly 1)")
            }
            Violation::Subchannel { uav, count } => {
                write!(f, "UAV {uav} holds {count} sub-channels (at most 1)")
            }
            Violation::PowerLevel { uav, count } => {
                write!(f, "UAV {uav} holds {count} power levels (at most 1)")
            }
            Violation::Shape { matrix, expected, actual } => {
                write!(f, "{matrix} matrix is {}x{}, expected {}x{}", actual.0, actual.1, expected.0, expected.1)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintReport {
    pub violations: Vec<Violation>,
}

impl ConstraintReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ConstraintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
