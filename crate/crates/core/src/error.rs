use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("number of KL terms must be even and at least 2, got {0}")]
    InvalidTerms(usize),

    #[error("series tail {name} is negative ({value:e}) beyond rounding slack at lambda = {lambda}, L = {l_terms}")]
    NegativeTail {
        name: &'static str,
        value: f64,
        lambda: f64,
        l_terms: usize,
    },

    #[error("expected {expected} draws, got {got}")]
    DrawLength { expected: usize, got: usize },

    #[error("cannot price from an empty sample")]
    EmptySample,

    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),

    #[error("variance floor applied to {events} of {paths} paths (limit 0.1%); increase L")]
    FloorRateExceeded { events: usize, paths: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
