use thiserror::Error;

/// Errors produced by the simulator and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("not a density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("state vector has zero norm")]
    ZeroNorm,

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("weights do not sum to one (sum = {0})")]
    Unnormalized(f64),

    #[error("post-selection outcome has probability {0:e}, below the degeneracy threshold")]
    DegenerateOutcome(f64),

    #[error("eigensolver did not converge after {0} sweeps")]
    EigenNoConvergence(usize),

    #[error("quadrature did not converge: {0}")]
    QuadratureNoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
