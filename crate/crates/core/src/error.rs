use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value exp({exponent}) overflows a native f64")]
    Overflow { exponent: f64 },

    #[error("singular input: {0}")]
    Singular(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ill-conditioned sample (condition number {0:e})")]
    IllConditioned(f64),

    #[error("collision: step size fell below {dt_min:e} at t = {time}")]
    Collision { time: f64, dt_min: f64 },
}

impl Error {
    pub fn singular(what: impl Into<String>) -> Self {
        Error::Singular(what.into())
    }

    pub fn invalid(what: impl Into<String>) -> Self {
        Error::InvalidArgument(what.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
