use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gcd({h}, {k}) != 1")]
    NotCoprime { h: i64, k: i64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series has a non-unit constant term {constant}; negative powers need +-1")]
    NonUnitConstant { constant: String },

    #[error("power series coefficient {index} is not an integer")]
    NonIntegral { index: usize },

    #[error("coefficient table covers 0..={limit}, index {index} requested")]
    OutOfRange { index: usize, limit: usize },

    #[error("values bound to {left}-bit and {right}-bit contexts cannot be combined")]
    ContextMismatch { left: u32, right: u32 },

    #[error("character sum for k = {k} has imaginary part {imag}, above tolerance {tolerance}")]
    ImaginaryResidue { k: i64, imag: String, tolerance: String },

    #[error("truncated product tail bound {bound} exceeds {eps}; raise the truncation")]
    TailTooLarge { bound: String, eps: String },

    #[error("{what}: difference {diff} exceeds {tolerance}")]
    Disagreement { what: String, diff: String, tolerance: String },

    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
