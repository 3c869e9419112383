use thiserror::Error;

use crate::modespace::Mode;

/// Errors produced while building, simulating or checking circuits.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(u64),

    #[error("exponent M = {0} is out of range")]
    BadExponent(u32),

    #[error(
        "variant {variant} requires an even exponent M (d = 2^M with even M); got d = {dim}"
    )]
    ParityRestriction { variant: String, dim: u64 },

    #[error("order of a two-port block must be nonzero")]
    ZeroOrder,

    #[error("mode {mode} is outside the contract domain of {block}")]
    OutsideDomain { mode: Mode, block: String },

    #[error("state basis [{found}] does not match operator input basis [{expected}]")]
    BasisMismatch { expected: String, found: String },

    #[error("basis too small: {element} maps amplitude onto {mode}, which is not in the basis")]
    BasisTooSmall { mode: Mode, element: String },

    #[error("closure exceeded {cap} labels while propagating through {element}")]
    ClosureCap { cap: usize, element: String },

    #[error("malformed netlist: {0}")]
    Netlist(String),

    #[error("basis construction failed: {0}")]
    Basis(String),

    #[error("degenerate operator: {0}")]
    Degenerate(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
