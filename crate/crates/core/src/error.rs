use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds the supported maximum {max} for {what}")]
    DimensionCap {
        what: &'static str,
        dim: usize,
        max: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("face of dimension {0} is too large for exact quadratic extrema (max 3)")]
    FaceTooLarge(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("numeric abort: {0}")]
    NumericAbort(String),

    #[error("edge {0} is not a lattice vector")]
    NotInLattice(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Config-class errors (bad names, files, parameters) versus numerical ones.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::InvalidParameter(_)
                | Error::DimensionMismatch { .. }
                | Error::DimensionCap { .. }
                | Error::Degenerate(_)
                | Error::NotInLattice(_)
                | Error::Empty(_)
        )
    }
}
