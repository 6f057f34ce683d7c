use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight {value} at {index:?} is not strictly positive")]
    NonPositiveWeight { index: (usize, usize), value: f64 },

    #[error("weights sum to {sum}, expected {expected}")]
    BadNormalization { sum: f64, expected: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("index {index} out of range for {len} tiles")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("target depth {target} is below the network depth {depth}")]
    DepthTooSmall { target: usize, depth: usize },

    #[error("input dimension mismatch: {0} vs {1}")]
    InputDimMismatch(usize, usize),

    #[error("spline width {0} is below the minimum of 8")]
    WidthTooSmall(usize),

    #[error("empty list of networks")]
    EmptyList,

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("instance too large: {0} atoms exceeds the cap of {1}")]
    TooLarge(usize, usize),

    #[error("marginal masses differ: {0} vs {1}")]
    InfeasibleMass(f64, f64),

    #[error("did not converge: marginal violation {0:e}")]
    NotConverged(f64),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 2,
            Error::Internal(_) | Error::NotConverged(_) => 3,
            _ => 1,
        }
    }

    pub fn parse(location: impl Into<String>, message: impl std::fmt::Display) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.to_string(),
        }
    }
}
