use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("probability {0} lies outside [0, 1]")]
    Domain(f64),

    #[error(
        "{what} needs {required} states, above the cap of {cap}; use the Monte Carlo path instead"
    )]
    CapExceeded {
        what: &'static str,
        required: u128,
        cap: u64,
    },

    #[error("typical set is empty for n = {n}, gamma = {gamma}")]
    EmptyTypicalSet { n: usize, gamma: f64 },

    #[error("sequence {0:?} is not in the typical set")]
    NotTypical(Vec<usize>),

    #[error("rank {rank} is out of range for a typical set of size {size}")]
    RankOutOfRange { rank: u64, size: u64 },

    #[error("map is undefined at support point {0:?}")]
    MapUndefined(Vec<usize>),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("base scheme rejected: {0}")]
    InvalidBaseScheme(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
