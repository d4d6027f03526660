use alloc::string::String;

use crate::model::Timestamp;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input not sorted by time at index {index}")]
    Unsorted { index: usize },

    #[error("open_time grids differ at {time} (exchange {exchange})")]
    GridMismatch { time: Timestamp, exchange: usize },

    #[error("unsupported funding interval: {0}h (expected 4, 8 or 12)")]
    UnsupportedInterval(u32),

    #[error("window of {window} periods exceeds series length {len}")]
    WindowTooLong { window: usize, len: usize },

    #[error("non-positive spot price {0}")]
    NonPositivePrice(f64),

    #[error("need at least {needed} bars, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("insufficient inputs: {got} metrics evaluated, {needed} required")]
    InsufficientInputs { needed: usize, got: usize },

    #[error("unknown config key `{0}`")]
    UnknownConfigKey(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfigValue { key: String, reason: String },

    #[error("decimal parse error: {0}")]
    Decimal(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("invalid record: {0}")]
    Invalid(String),
}
