use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value produced at node {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("element {element} is not a member of subgroup {subgroup}")]
    Membership { subgroup: String, element: String },

    #[error("point ({u}, {v}) does not land on a torus grid node")]
    OffGrid { u: f64, v: f64 },

    #[error("shift {shift} is not a multiple of the grid step {step}")]
    OffGridShift { shift: f64, step: f64 },

    #[error("quasi-periodicity index mismatch: field has m={field}, parameters have m={params}")]
    IndexMismatch { field: u32, params: u32 },

    #[error("incompatible grids: {0}")]
    GridIncompatible(String),

    #[error("support of the input exceeds the Zak truncation window (tail ratio {tail_ratio:e})")]
    SupportOverflow { tail_ratio: f64 },

    #[error("theta series term modulus exceeded 1e100 at n={n}")]
    DivergenceGuard { n: i64 },

    #[error("peeling weight exponent {exponent:e} exceeds the overflow guard")]
    OverflowGuard { exponent: f64 },

    #[error("Hermite order {0} exceeds the supported maximum of 32")]
    OrderTooLarge(usize),

    #[error("unsupported {0}")]
    Unsupported(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for the numerical guards (overflow, divergence, support truncation).
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::SupportOverflow { .. } | Error::DivergenceGuard { .. } | Error::OverflowGuard { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
