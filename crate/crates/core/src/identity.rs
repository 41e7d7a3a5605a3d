//! Rolling check that the volatility forms agree.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::price_volatility::price_volatility;
use crate::returns::{build_returns, returns_volatility};
use crate::trade::{rolling_windows, select_window, TradeSeries};

/// Largest accepted `|a − b| / max(1, |a|)` between two forms.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IdentityStat {
    /// Non-empty windows evaluated.
    pub windows: usize,
    pub max_deviation: f64,
}

impl IdentityStat {
    pub fn passed(&self) -> bool {
        self.max_deviation <= IDENTITY_TOLERANCE
    }

    fn fold(deviations: impl Iterator<Item = f64>) -> Self {
        deviations.fold(Self::default(), |acc, d| Self { windows: acc.windows + 1, max_deviation: acc.max_deviation.max(d) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// Direct against closed price volatility.
    pub price: IdentityStat,
    /// Pairwise among the three returns forms; `None` when the lag leaves no records.
    pub returns: Option<IdentityStat>,
    pub lag: usize,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.price.passed() && self.returns.is_none_or(|r| r.passed())
    }
}

pub fn check_identities(series: &TradeSeries, width: f64, stride: f64, lag: usize) -> Result<IdentityReport> {
    let span = series.time_span().ok_or(Error::EmptyInput)?;
    let windows = rolling_windows(span, width, stride)?;

    let price_devs: Vec<f64> = windows
        .par_iter()
        .filter_map(|spec| {
            let view = select_window(series, *spec);
            (!view.is_empty()).then(|| price_volatility(&view).map(|r| r.deviation()))
        })
        .collect::<Result<_>>()?;

    let returns = match build_returns(series, lag) {
        Ok(rs) => {
            let devs: Vec<f64> = windows
                .par_iter()
                .filter_map(|spec| {
                    let records = rs.select_window(spec);
                    (!records.is_empty()).then(|| returns_volatility(records).map(|r| r.max_deviation()))
                })
                .collect::<Result<_>>()?;
            Some(IdentityStat::fold(devs.into_iter()))
        }
        Err(Error::LagTooLarge { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(IdentityReport { price: IdentityStat::fold(price_devs.into_iter()), returns, lag })
}
