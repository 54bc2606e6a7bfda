use thiserror::Error;

use crate::lindblad::DensityOperator;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not symmetric (defect {defect:e})")]
    NotSymmetric { defect: f64 },

    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("eigenvalue iteration exceeded its budget")]
    NoConvergence,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("map is not an involution: {0}")]
    NotInvolution(String),

    #[error("state is not faithful (smallest eigenvalue {min_eigenvalue:e})")]
    NotFaithful { min_eigenvalue: f64 },

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("representation is not special: {0}")]
    NotSpecial(String),

    /// The stationary null space has more than one dimension. When some
    /// element of it is a valid state, it is carried along.
    #[error("stationary state is not unique (null space dimension {dimension})")]
    NonUniqueStationary {
        dimension: usize,
        representative: Option<Box<DensityOperator>>,
    },

    #[error("no positive semidefinite stationary state exists")]
    NoPositiveStationary,

    #[error("identity lies in the span of the jump operators; the shift cannot produce a special TC representation")]
    IdentityInSpan,

    #[error("jump operators are linearly dependent")]
    LinearlyDependent,

    #[error("representation is not thermodynamically consistent: {0}")]
    NotThermodynamicallyConsistent(String),

    #[error("generator does not satisfy standard quantum detailed balance")]
    SqdbRequired,

    #[error("not a probability distribution: {0}")]
    NotDistribution(String),

    #[error("superoperator is not a Lindblad generator: {0}")]
    NotLindblad(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
