use thiserror::Error;

/// Errors raised by group, representation, channel and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("multiplication table is not associative at ({0}, {1}, {2})")]
    NonAssociativeTable(usize, usize, usize),
    #[error("multiplication table has no two-sided identity")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("unsupported group descriptor: {0}")]
    UnsupportedDescriptor(String),
    #[error("generator set is empty")]
    EmptyGeneratorSet,
    #[error("element set is not a subgroup")]
    NotASubgroup,
    #[error("group is not abelian")]
    NonAbelianGroup,
    #[error("no irreducible representations known for this group: {0}")]
    UnsupportedGroup(String),
    #[error("invalid representation: {0}")]
    InvalidRep(String),
    #[error("vector is not a unit vector (norm {0})")]
    NonUnitVector(f64),
    #[error("function is not normalized at the identity (value {0})")]
    NotNormalizedAtIdentity(String),
    #[error("function is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("invalid probability measure: {0}")]
    InvalidMeasure(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Kraus family is not trace preserving (residual {0:e})")]
    NotTracePreserving(f64),
    #[error("correlation matrix has rank {0}, expected 2")]
    RankNotTwo(usize),
    #[error("representation must have dimension at least 2")]
    RepresentationDimensionOne,
    #[error("input is empty")]
    EmptyInput,
    #[error("matrix is not a state: {0}")]
    NotAState(String),
    #[error("subspace is not an algebra: {0}")]
    NotAnAlgebra(String),
    #[error("fixed points do not form an algebra: {0}")]
    FixedPointsNotAlgebra(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
