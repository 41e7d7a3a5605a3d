//! Trades, validated trade series and averaging windows.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, TradeDefect};

/// One market transaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trade {
    /// 0-based position in the owning series.
    pub index: usize,
    /// Seconds, on an arbitrary origin.
    pub timestamp: f64,
    pub cost: f64,
    pub volume: f64,
}

impl Trade {
    /// Price of the trade, `C / V`.
    #[inline]
    pub fn price(&self) -> f64 {
        self.cost / self.volume
    }
}

/// Price of a trade, `C / V`.
#[inline]
pub fn price_of(trade: &Trade) -> f64 {
    trade.price()
}

/// A time-ordered sequence of valid trades with consecutive indices from 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TradeSeries {
    trades: Vec<Trade>,
}

/// Raw `(timestamp, cost, volume)` input row.
pub type RawTrade = (f64, f64, f64);

fn check_row(row: usize, (ts, cost, volume): RawTrade) -> Result<()> {
    let defect = if !ts.is_finite() {
        Some(TradeDefect::NonFiniteTimestamp)
    } else if !(cost > 0.0 && cost.is_finite()) {
        Some(TradeDefect::NonPositiveCost)
    } else if !(volume > 0.0 && volume.is_finite()) {
        Some(TradeDefect::NonPositiveVolume)
    } else {
        None
    };
    match defect {
        Some(defect) => Err(Error::InvalidTrade { row, defect }),
        None => Ok(()),
    }
}

/// Validates raw rows and sorts them stably by timestamp.
///
/// Rows with equal timestamps keep their input order. Indices are assigned
/// after sorting. Errors name the 1-based input row of the first bad trade.
pub fn validate_series<I>(raw: I) -> Result<TradeSeries>
where
    I: IntoIterator<Item = RawTrade>,
{
    let mut rows = Vec::new();
    for (i, row) in raw.into_iter().enumerate() {
        check_row(i + 1, row)?;
        rows.push(row);
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let trades = rows
        .into_iter()
        .enumerate()
        .map(|(index, (timestamp, cost, volume))| Trade { index, timestamp, cost, volume })
        .collect();
    Ok(TradeSeries { trades })
}

impl TradeSeries {
    pub fn trades(&self) -> &[Trade] {
        &self.trades
    }

    pub fn len(&self) -> usize {
        self.trades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trades.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Trade> {
        self.trades.get(index)
    }

    /// `(first, last)` timestamps, or `None` for an empty series.
    pub fn time_span(&self) -> Option<(f64, f64)> {
        Some((self.trades.first()?.timestamp, self.trades.last()?.timestamp))
    }

    /// The trades of `view` as a new series, re-indexed from 0.
    pub fn restrict(&self, view: &WindowView<'_>) -> TradeSeries {
        let trades = view
            .trades()
            .iter()
            .enumerate()
            .map(|(index, t)| Trade { index, ..*t })
            .collect();
        TradeSeries { trades }
    }

    /// Applies `f` to every `(cost, volume)` pair and revalidates.
    pub fn map_quantities<F>(&self, mut f: F) -> Result<TradeSeries>
    where
        F: FnMut(f64, f64) -> (f64, f64),
    {
        validate_series(self.trades.iter().map(|t| {
            let (c, v) = f(t.cost, t.volume);
            (t.timestamp, c, v)
        }))
    }
}

/// An averaging window `[center − width/2, center + width/2]`, both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub center: f64,
    pub width: f64,
}

impl WindowSpec {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::InvalidWindow(format!("center {center} is not finite")));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidWindow(format!("width {width} must be positive and finite")));
        }
        Ok(Self { center, width })
    }

    pub fn start(&self) -> f64 {
        self.center - self.width / 2.0
    }

    pub fn end(&self) -> f64 {
        self.center + self.width / 2.0
    }

    /// Step-function membership: a trade exactly on either edge is inside.
    #[inline]
    pub fn contains(&self, t: f64) -> bool {
        self.start() <= t && t <= self.end()
    }
}

/// The members of a series that fall inside a window.
///
/// The series is time-ordered, so members always form a contiguous index range.
#[derive(Debug, Clone)]
pub struct WindowView<'a> {
    series: &'a TradeSeries,
    members: Range<usize>,
    spec: WindowSpec,
}

impl<'a> WindowView<'a> {
    pub fn spec(&self) -> WindowSpec {
        self.spec
    }

    pub fn members(&self) -> Range<usize> {
        self.members.clone()
    }

    pub fn trades(&self) -> &'a [Trade] {
        &self.series.trades[self.members.clone()]
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn series(&self) -> &'a TradeSeries {
        self.series
    }
}

/// Index range of the time-ordered `timestamps` that fall inside `spec`.
pub(crate) fn window_range<T>(items: &[T], spec: &WindowSpec, ts: impl Fn(&T) -> f64) -> Range<usize> {
    let (start, end) = (spec.start(), spec.end());
    let lo = items.partition_point(|x| ts(x) < start);
    let hi = items.partition_point(|x| ts(x) <= end);
    lo..hi.max(lo)
}

/// Selects the trades with `center − width/2 ≤ tᵢ ≤ center + width/2`.
pub fn select_window<'a>(series: &'a TradeSeries, spec: WindowSpec) -> WindowView<'a> {
    let members = window_range(&series.trades, &spec, |t| t.timestamp);
    WindowView { series, members, spec }
}

/// Number of trades `N(t)` in a window.
pub fn trade_count(view: &WindowView<'_>) -> usize {
    view.members.len()
}

/// Window specs for rolling evaluation.
///
/// Centers start at `first + width/2` and advance by `stride` while the
/// window still starts at or before the last timestamp. Centers are computed
/// as `origin + k·stride`, not by accumulation.
pub fn rolling_windows(span: (f64, f64), width: f64, stride: f64) -> Result<Vec<WindowSpec>> {
    if !(stride > 0.0 && stride.is_finite()) {
        return Err(Error::InvalidWindow(format!("stride {stride} must be positive and finite")));
    }
    let (first, last) = span;
    let origin = WindowSpec::new(first + width / 2.0, width)?;
    let count = ((last - first) / stride).floor() as usize + 1;
    (0..count)
        .map(|k| WindowSpec::new(origin.center + k as f64 * stride, width))
        .collect()
}
