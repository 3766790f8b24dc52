use alloc::string::String;

/// Errors raised while building or evaluating copulas.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid copula spec: {0}")]
    InvalidSpec(String),

    #[error("invalid family path: {0}")]
    InvalidFamily(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid quadrature config: {0}")]
    InvalidQuadrature(String),

    #[error("invalid permutation {0:?}: expected a rearrangement of (1,2,3)")]
    InvalidPermutation([usize; 3]),

    #[error(
        "quadrature did not converge on [{lower}, {upper}]: estimate {estimate}, \
         last change {change:e} with {panels} panels per piece"
    )]
    Quadrature {
        lower: f64,
        upper: f64,
        estimate: f64,
        change: f64,
        panels: usize,
    },

    #[error("triple is not compatible: {0}")]
    Incompatible(crate::bounds::Witness),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
