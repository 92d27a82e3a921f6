use thiserror::Error;

use crate::polynomial::Monomial;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain is unbounded: accepted sample {0} touches the probe box")]
    Unbounded(String),

    #[error("invalid prototype: {0}")]
    InvalidPrototype(String),

    #[error("homothets reference different prototypes")]
    PrototypeMismatch,

    #[error("operation requires a continuous flexibility domain; {0}")]
    DiscreteDomain(&'static str),

    #[error("certificate degree too low: monomial {monomial} of the target is not representable at degree {degree}")]
    DegreeMismatch { monomial: Monomial, degree: u32 },

    #[error("basis degree {0} exceeds the configured limit {1}")]
    BasisTooLarge(u32, u32),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("beta outside domain: no feasible inner homothet at {0:?}")]
    BetaOutsideDomain(crate::Point),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
