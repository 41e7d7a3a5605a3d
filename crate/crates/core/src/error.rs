use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// What is wrong with a single input trade.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TradeDefect {
    NonFiniteTimestamp,
    NonPositiveCost,
    NonPositiveVolume,
}

impl fmt::Display for TradeDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TradeDefect::NonFiniteTimestamp => "timestamp must be finite",
            TradeDefect::NonPositiveCost => "cost must be positive",
            TradeDefect::NonPositiveVolume => "volume must be positive",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// `row` is the 1-based position of the trade in the raw input.
    #[error("row {row}: {defect}")]
    InvalidTrade { row: usize, defect: TradeDefect },

    #[error("window contains no trades")]
    EmptyWindow,

    #[error("degree {degree} out of range 1..={max}")]
    DegreeOutOfRange { degree: u32, max: u32 },

    #[error("truncation order {order} out of range 1..={max}")]
    TruncationOrderOutOfRange { order: u32, max: u32 },

    #[error("lag must be at least 1")]
    ZeroLag,

    #[error("lag {lag} leaves no returns in a series of {len} trades")]
    LagTooLarge { lag: usize, len: usize },

    #[error("denominator {value:e} is not positive; dispersion statistics are corrupted")]
    DegenerateDenominator { value: f64 },

    #[error("windows around t={first} and t={second} overlap at width {width}; only identical or pairwise disjoint windows are supported")]
    UnsupportedWindowOverlap { first: f64, second: f64, width: f64 },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input contains no trades")]
    EmptyInput,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
