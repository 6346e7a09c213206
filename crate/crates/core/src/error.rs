use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("matrix is not symmetric (relative residual {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (smallest eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("matrix is singular (relative smallest singular value {0:.3e})")]
    Singular(f64),
    #[error("empty basis")]
    EmptyBasis,
    #[error("basis is linearly dependent (rank {rank} < {size})")]
    DegenerateBasis { rank: usize, size: usize },
    #[error("basis is not closed under brackets (relative residual {residual:.3e})")]
    NotALieAlgebra { residual: f64 },
    #[error("basis is not closed under transpose (relative residual {residual:.3e})")]
    NotSelfAdjoint { residual: f64 },
    #[error("zero vector")]
    ZeroVector,
    #[error("orbit is bounded: the growth subspace is trivial")]
    BoundedOrbit,
    #[error("symmetric part of the algebra is trivial (compact group)")]
    CompactGroup,
    #[error("rejected: {0}")]
    Rejected(String),
    #[error("numerical diagnostic failure: {0}")]
    Diagnostic(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Variant name, for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonFinite => "NonFinite",
            Error::NotSymmetric(_) => "NotSymmetric",
            Error::NotPositiveDefinite(_) => "NotPositiveDefinite",
            Error::Singular(_) => "Singular",
            Error::EmptyBasis => "EmptyBasis",
            Error::DegenerateBasis { .. } => "DegenerateBasis",
            Error::NotALieAlgebra { .. } => "NotALieAlgebra",
            Error::NotSelfAdjoint { .. } => "NotSelfAdjoint",
            Error::ZeroVector => "ZeroVector",
            Error::BoundedOrbit => "BoundedOrbit",
            Error::CompactGroup => "CompactGroup",
            Error::Rejected(_) => "Rejected",
            Error::Diagnostic(_) => "Diagnostic",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}
