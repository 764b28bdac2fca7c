use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("ramification mismatch: {left} vs {right} (lift to a common ramification first)")]
    RamificationMismatch { left: u32, right: u32 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("truncation window exhausted: coefficients are only determined up to exponent {achievable_num}/{ram}")]
    WindowExhausted { achievable_num: i64, ram: u32 },

    #[error("resonance at exponent {num}/{ram}: {detail}")]
    Resonance { num: i64, ram: u32, detail: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
