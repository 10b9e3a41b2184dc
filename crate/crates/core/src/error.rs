use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    NotSquare { rows: usize, cols: usize },
    DimensionMismatch { expected: usize, found: usize },
    EmptyInput,
    /// LU pivot below the relative singularity threshold.
    SingularMatrix { pivot: usize },
    /// A per-time-index block of a preconditioner could not be factored.
    SingularBlock { index: usize },
    /// Shifted spatial operator singular at the given Fourier/spatial mode.
    SingularShift { mode: usize },
    /// Power-trace consistency failed: the matrix is not (numerically) rank ≤ 2.
    RankInconsistent { relative_error: f64 },
    InvalidParameter(&'static str),
    /// Closed-form result requested outside the hypotheses it was derived under.
    OutsideTheory(&'static str),
    MissingData(&'static str),
    NonFinite,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotSquare { rows, cols } => write!(f, "matrix is not square ({rows}x{cols})"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::EmptyInput => f.write_str("empty input"),
            Error::SingularMatrix { pivot } => write!(f, "singular matrix at pivot {pivot}"),
            Error::SingularBlock { index } => {
                write!(f, "singular preconditioner block at time-frequency index {index}")
            }
            Error::SingularShift { mode } => write!(f, "singular shifted operator at mode {mode}"),
            Error::RankInconsistent { relative_error } => write!(
                f,
                "power traces inconsistent with rank <= 2 (relative error {relative_error:e})"
            ),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::OutsideTheory(what) => write!(f, "outside the closed-form domain: {what}"),
            Error::MissingData(what) => write!(f, "missing data: {what}"),
            Error::NonFinite => f.write_str("non-finite value encountered"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
