//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("base {base} not supported, need base >= 2")]
    InvalidBase { base: u32 },

    #[error("digit {digit} invalid for base {base}")]
    InvalidDigit { digit: u32, base: u32 },

    #[error("pattern word must contain at least one digit")]
    EmptyWord,

    #[error("offset {offset} out of range for stride exponent {stride_exp} in base {base}")]
    InvalidLinearForm {
        stride_exp: u32,
        offset: u64,
        base: u32,
    },

    #[error("term has no sign digits left to rewrite")]
    NothingToRewrite,

    #[error("horizon {given} too small, finite-support check needs at least {required}")]
    HorizonTooSmall { given: u64, required: u64 },

    #[error("argument range overflows a 64-bit integer ({what})")]
    RangeOverflow { what: String },

    #[error("function with decay exponent {beta} is not admissible here (needs beta < {required})")]
    NotAdmissible { beta: f64, required: f64 },

    #[error("power function needs a positive exponent, got {p}")]
    InvalidPowerExponent { p: f64 },

    #[error("growth fit applies only to the power-growth case, not {case}")]
    NotPowerCase { case: String },

    #[error("no sign-flip witness pair of length {k} exists for the given suffix ({detail})")]
    WitnessExhausted { k: usize, detail: String },

    #[error("product start index must be 0 or 1, got {start}")]
    InvalidStart { start: u8 },

    #[error("malformed serialized value: {detail}")]
    Malformed { detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
