use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Cholesky factorization hit a nonpositive pivot.
    NotPositiveDefinite { dim: usize, pivot: usize },
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// An argument lies outside the domain of a function or distribution.
    Domain(String),
    /// A computation produced a non-finite or degenerate value.
    Numerical(String),
    EmptyInput(&'static str),
    /// A Gibbs sweep failed; `block` names the update that raised `source`.
    Sweep {
        sweep: usize,
        block: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for failures that come from floating-point trouble rather than
    /// from bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotPositiveDefinite { .. } | Error::Numerical(_) => true,
            Error::Sweep { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPositiveDefinite { dim, pivot } => write!(
                f,
                "matrix of dimension {dim} is not positive definite (pivot {pivot})"
            ),
            Error::DimensionMismatch { expected, found } => write!(
                f,
                "dimension mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::Sweep {
                sweep,
                block,
                source,
            } => write!(f, "sweep {sweep}, {block} update: {source}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::Sweep { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
