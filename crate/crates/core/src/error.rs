use thiserror::Error;

use crate::netfile::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular to working precision (pivot {pivot:.3e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("matrix is not hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("transfer function has a pole at s = {re}{im:+}i")]
    SingularAtS { re: f64, im: f64 },

    #[error("C^dag C and Omega do not commute (residual {residual:.3e})")]
    NotCommuting { residual: f64 },

    #[error("frequency shift of the decoupled subspace is not determined by the parameters")]
    ZeroModeAmbiguity,

    #[error("algebraic loop: (eta - S_ii) is singular")]
    AlgebraicLoop,

    #[error("invalid partition: {0}")]
    BadPartition(String),

    #[error("argument outside the domain of the Moebius transform")]
    OutsideDomain,

    #[error("-1 is an eigenvalue of S; no finite Stratonovich generator exists")]
    CayleySingular,

    #[error("invalid component: {0}")]
    InvalidComponent(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}
