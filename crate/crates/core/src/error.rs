use alloc::string::String;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("requires f ∈ 𝒜_d⁺: smallest eigenvalue {min_eig:e} is below the positivity gate")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("invalid reference state: {0}")]
    InvalidState(String),

    #[error("generator is not primitive: {0}")]
    NotPrimitive(String),

    #[error("generator is not {0}")]
    MissingProperty(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix exponential overflow (norm {norm:e})")]
    Overflow { norm: f64 },

    #[error("dimension {dim} exceeds the dense superoperator ceiling of {max}")]
    TooLarge { dim: usize, max: usize },

    #[error("Kraus operators are not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("linear solve failed: {0}")]
    Singular(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
