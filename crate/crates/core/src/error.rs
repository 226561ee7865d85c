use thiserror::Error;

/// Errors surfaced by the engine and its input types.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// The `(k, n)` data do not describe a valid format profile.
    #[error("invalid format profile: {0}")]
    InvalidProfile(String),

    /// No tensor of the ambient format attains this multilinear rank, so the
    /// hypothesis behind the degree formula is not met.
    #[error(
        "rank profile k={k:?} is not realizable (requires k_i <= prod of the other k_j); \
         use the unrealizable override to compute the formal value anyway"
    )]
    RankNotRealizable { k: Vec<u32> },

    /// A polynomial expansion grew past the configured term budget.
    #[error("resource limit exceeded: {0}")]
    ResourceExceeded(String),

    /// The degree formula produced a non-integer, which signals an
    /// implementation bug: the degree of a variety is an integer.
    #[error("degree formula returned the non-integer {value}; this is a bug")]
    IntegralityViolation { value: String },
}

pub type Result<T> = std::result::Result<T, Error>;
