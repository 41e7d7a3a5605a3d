//! Degree-n cost and volume aggregates and the price moments built from them.
//!
//! For a window `W` around `t`:
//!
//! ```text
//! C(n;t) = Σ_{i∈W} Cᵢⁿ      V(n;t) = Σ_{i∈W} Vᵢⁿ      p(n;t) = C(n;t) / V(n;t)
//! ```
//!
//! `p(1;t)` is the VWAP. All sums are compensated and run in ascending
//! trade index order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;
use crate::trade::{rolling_windows, select_window, trade_count, TradeSeries, WindowSpec, WindowView};
use crate::check_degree;

/// `C(n;t)` and `V(n;t)` for one degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeAggregate {
    pub degree: u32,
    pub cost_sum: f64,
    pub volume_sum: f64,
}

impl DegreeAggregate {
    /// `p(n;t) = C(n;t) / V(n;t)`.
    pub fn moment(&self) -> f64 {
        self.cost_sum / self.volume_sum
    }
}

/// One stored degree of a [`PriceMoments`] record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeMoment {
    pub degree: u32,
    pub cost_sum: f64,
    pub volume_sum: f64,
    pub moment: f64,
}

impl From<DegreeAggregate> for DegreeMoment {
    fn from(a: DegreeAggregate) -> Self {
        Self { degree: a.degree, cost_sum: a.cost_sum, volume_sum: a.volume_sum, moment: a.moment() }
    }
}

impl DegreeMoment {
    /// `|C − p·V|` within a few ulps of `C`.
    pub fn is_consistent(&self) -> bool {
        let residual = (self.cost_sum - self.moment * self.volume_sum).abs();
        residual <= 4.0 * f64::EPSILON * self.cost_sum.abs()
    }
}

/// Price moments of one window. An empty window has `trade_count == 0` and no entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceMoments {
    pub window: WindowSpec,
    pub trade_count: usize,
    pub entries: Vec<DegreeMoment>,
}

impl PriceMoments {
    pub fn is_empty(&self) -> bool {
        self.trade_count == 0
    }

    pub fn get(&self, degree: u32) -> Option<&DegreeMoment> {
        self.entries.iter().find(|e| e.degree == degree)
    }
}

fn require_members(view: &WindowView<'_>) -> Result<()> {
    if view.is_empty() {
        return Err(Error::EmptyWindow);
    }
    Ok(())
}

/// `C(n;t)` and `V(n;t)` over the window.
pub fn aggregate_degree(view: &WindowView<'_>, n: u32) -> Result<DegreeAggregate> {
    require_members(view)?;
    check_degree(n)?;
    let exp = n as i32;
    let mut cost = CompensatedSum::new();
    let mut volume = CompensatedSum::new();
    for t in view.trades() {
        cost += t.cost.powi(exp);
        volume += t.volume.powi(exp);
    }
    Ok(DegreeAggregate { degree: n, cost_sum: cost.value(), volume_sum: volume.value() })
}

/// `p(n;t) = C(n;t) / V(n;t)`.
pub fn price_moment(view: &WindowView<'_>, n: u32) -> Result<f64> {
    aggregate_degree(view, n).map(|a| a.moment())
}

/// Volume weighted average price; identical to `price_moment(view, 1)`.
pub fn vwap(view: &WindowView<'_>) -> Result<f64> {
    price_moment(view, 1)
}

/// Unweighted mean of per-trade prices, `(1/N) Σ Cᵢ/Vᵢ`.
pub fn simple_average_price(view: &WindowView<'_>) -> Result<f64> {
    require_members(view)?;
    let sum: CompensatedSum = view.trades().iter().map(|t| t.price()).collect();
    Ok(sum.value() / trade_count(view) as f64)
}

/// Price moments of a single window for each requested degree.
pub fn window_moments(view: &WindowView<'_>, degrees: &[u32]) -> Result<PriceMoments> {
    for &n in degrees {
        check_degree(n)?;
    }
    let entries = if view.is_empty() {
        Vec::new()
    } else {
        degrees
            .iter()
            .map(|&n| aggregate_degree(view, n).map(DegreeMoment::from))
            .collect::<Result<_>>()?
    };
    Ok(PriceMoments { window: view.spec(), trade_count: trade_count(view), entries })
}

/// Price moments on rolling windows across the series time span.
///
/// Windows are evaluated in parallel; output is in center order.
pub fn rolling_moments(series: &TradeSeries, width: f64, stride: f64, degrees: &[u32]) -> Result<Vec<PriceMoments>> {
    for &n in degrees {
        check_degree(n)?;
    }
    let Some(span) = series.time_span() else {
        return Ok(Vec::new());
    };
    rolling_windows(span, width, stride)?
        .into_par_iter()
        .map(|spec| window_moments(&select_window(series, spec), degrees))
        .collect()
}
