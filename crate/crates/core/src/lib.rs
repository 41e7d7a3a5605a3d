//! Volume-weighted statistics of market trades.
//!
//! Every statistic here is built from three numbers per trade: timestamp,
//! cost (money paid) and volume (units exchanged). Price is cost over volume.
//! Windows of width `Δ` around a center `t` aggregate n-th powers of cost and
//! volume; their ratio is the n-th price moment `p(n;t)`. Volatilities are
//! available both directly and through a decomposition into cost and volume
//! dispersions, and the two routes are expected to agree to rounding.

pub mod charfun;
pub mod error;
pub mod identity;
pub mod ingest;
pub mod price_moments;
pub mod price_volatility;
pub mod returns;
pub mod sim;
pub mod sum;
pub mod trade;

pub use error::{Error, Result};
pub use trade::{Trade, TradeSeries, WindowSpec, WindowView};

/// Degree cap used when the caller does not configure one.
pub const DEFAULT_DEGREE_CAP: u32 = 8;

/// Largest degree any operation accepts. `Cⁿ` leaves the double range quickly
/// beyond this for realistic prices.
pub const MAX_DEGREE: u32 = 16;

pub(crate) fn check_degree(n: u32) -> Result<()> {
    if n == 0 || n > MAX_DEGREE {
        return Err(Error::DegreeOutOfRange { degree: n, max: MAX_DEGREE });
    }
    Ok(())
}
