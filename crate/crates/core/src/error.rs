use thiserror::Error;

/// Errors raised by the core routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid region: {0}")]
    InvalidRegion(&'static str),
    #[error("sample nodes must be pairwise distinct (nodes {0} and {1} coincide)")]
    DuplicateNode(usize, usize),
    #[error("at least one sample node is required")]
    EmptySampleSet,
    #[error("polynomial degree {degree} exceeds the basis maximum {max}")]
    DegreeTooHigh { degree: usize, max: usize },
    #[error("denominator degree N = {degree} violates N <= S - 1 with S = {samples}")]
    DegreeExceedsSamples { degree: usize, samples: usize },
    #[error("coefficient vector is identically zero")]
    AllZero,
    #[error("the only snapshot has zero norm")]
    ZeroSnapshot,
    #[error("weight matrix is not Hermitian positive definite")]
    NotPositiveDefinite,
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("approximate pole list is empty")]
    EmptyApprox,
    #[error("evaluation point coincides with a pole")]
    AtPole,
    #[error("evaluation point coincides with sample node {0}")]
    NodePoint(usize),
    #[error("linear system is singular at the requested parameter")]
    SingularSystem,
    #[error("requested {requested} directions but the snapshots have numerical rank {rank}")]
    RankDeficient { requested: usize, rank: usize },
    #[error("operator is not of the form F0 + mu F1 with a constant right-hand side")]
    NotLinearInMu,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
