use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("inverse temperature must be >= 0, got {0}")]
    NegativeBeta(f64),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("{what}: size {got} exceeds cap {cap}")]
    SizeCap { what: &'static str, got: u64, cap: u64 },
    #[error("weight vector has length {got}, model has {expected} edges")]
    LengthMismatch { expected: usize, got: usize },
    #[error("every configuration has infinite weight (Z = 0)")]
    AllInfinite,
    #[error("reduced Laplacian is ill-conditioned (pivot ratio {0:.3e})")]
    IllConditioned(f64),
    #[error("partition sum underflowed; β too large for this method")]
    Underflow,
    #[error("Ryser summation lost precision (relative error bound {0:.3e})")]
    Cancellation(f64),
    #[error("configurations belong to different models")]
    ModelMismatch,
    #[error("samples must be sorted in nondecreasing order")]
    Unsorted,
    #[error("{0}")]
    Empty(&'static str),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_nan() || beta < 0.0 {
        Err(Error::NegativeBeta(beta))
    } else {
        Ok(())
    }
}
