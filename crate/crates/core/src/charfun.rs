//! Multi-time moments and the truncated characteristic functional.
//!
//! A multi-time moment `p(n; t₁..tₙ)` is the ratio of sums of products of a
//! cost-like quantity `a` and a volume-like quantity `b` over combinations of
//! trades drawn from the windows around `t₁..tₙ`. Two regimes are defined:
//!
//! * all times identical: the diagonal sum `Σ aᵢⁿ / Σ bᵢⁿ`, which is the
//!   single-window moment;
//! * pairwise disjoint windows: the full Cartesian product, so the sums
//!   factor into `Π_j Σ_{i∈W_j} aᵢ`.
//!
//! A tuple with repeated times mixes the two: slots sharing a time use the
//! diagonal rule, distinct times must have disjoint windows and combine as a
//! product. Distinct times whose windows overlap are rejected.
//!
//! The characteristic functional is evaluated on a uniform grid with the
//! left-point rule and truncated at order `n_max`:
//!
//! ```text
//! F(x) = 1 + Σ_{n=1}^{n_max} (iⁿ/n!) Σ_{g₁..gₙ} p(n; t_{g₁}..t_{gₙ}) x(g₁)…x(gₙ) hⁿ
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::returns::ReturnsSeries;
use crate::sum::CompensatedSum;
use crate::trade::{window_range, TradeSeries, WindowSpec};
use crate::{check_degree, MAX_DEGREE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairPoint {
    pub timestamp: f64,
    pub a: f64,
    pub b: f64,
}

/// Time-ordered `(t, a, b)` records with `a, b > 0`: `(C, V)` of trades or
/// `(q_c, q_v)` of lag-m returns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairSeries {
    points: Vec<PairPoint>,
}

impl PairSeries {
    pub fn new(points: Vec<PairPoint>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            let ok = p.timestamp.is_finite() && p.a > 0.0 && p.b > 0.0 && p.a.is_finite() && p.b.is_finite();
            if !ok {
                return Err(Error::InvalidWindow(format!("pair record {i} is not finite and positive")));
            }
        }
        if points.windows(2).any(|w| w[1].timestamp < w[0].timestamp) {
            return Err(Error::InvalidWindow("pair records are not time-ordered".into()));
        }
        Ok(Self { points })
    }

    pub fn from_trades(series: &TradeSeries) -> Self {
        let points = series
            .trades()
            .iter()
            .map(|t| PairPoint { timestamp: t.timestamp, a: t.cost, b: t.volume })
            .collect();
        Self { points }
    }

    pub fn from_returns(returns: &ReturnsSeries) -> Self {
        let points = returns
            .records()
            .iter()
            .map(|r| PairPoint { timestamp: r.timestamp, a: r.q_c, b: r.q_v })
            .collect();
        Self { points }
    }

    pub fn points(&self) -> &[PairPoint] {
        &self.points
    }

    pub fn window(&self, spec: &WindowSpec) -> &[PairPoint] {
        &self.points[window_range(&self.points, spec, |p| p.timestamp)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiTimeMoment {
    pub times: Vec<f64>,
    pub width: f64,
    /// Number of trade combinations summed over. Kept as a float because the
    /// Cartesian product overflows integers quickly.
    pub combo_count: f64,
    pub a_sum: f64,
    pub b_sum: f64,
    pub moment: f64,
}

/// Distinct times with their multiplicities, ascending.
fn group_times(times: &[f64]) -> Vec<(f64, u32)> {
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups: Vec<(f64, u32)> = Vec::new();
    for t in sorted {
        match groups.last_mut() {
            Some((last, k)) if *last == t => *k += 1,
            _ => groups.push((t, 1)),
        }
    }
    groups
}

/// Fails unless consecutive windows in ascending `times` are disjoint.
fn check_separated(times: impl IntoIterator<Item = f64>, width: f64) -> Result<()> {
    let mut prev: Option<WindowSpec> = None;
    for t in times {
        let spec = WindowSpec::new(t, width)?;
        if let Some(p) = prev {
            if spec.start() <= p.end() {
                return Err(Error::UnsupportedWindowOverlap { first: p.center, second: t, width });
            }
        }
        prev = Some(spec);
    }
    Ok(())
}

/// `p(n; t₁..tₙ)` with `n = times.len()`.
pub fn multi_time_moment(series: &PairSeries, times: &[f64], width: f64) -> Result<MultiTimeMoment> {
    let n = u32::try_from(times.len()).unwrap_or(u32::MAX);
    check_degree(n)?;
    let groups = group_times(times);
    check_separated(groups.iter().map(|g| g.0), width)?;

    let (mut a_sum, mut b_sum, mut combo_count) = (1.0, 1.0, 1.0);
    for &(t, k) in &groups {
        let members = series.window(&WindowSpec::new(t, width)?);
        if members.is_empty() {
            return Err(Error::EmptyWindow);
        }
        let exp = k as i32;
        let mut a = CompensatedSum::new();
        let mut b = CompensatedSum::new();
        for p in members {
            a += p.a.powi(exp);
            b += p.b.powi(exp);
        }
        a_sum *= a.value();
        b_sum *= b.value();
        combo_count *= members.len() as f64;
    }
    Ok(MultiTimeMoment { times: times.to_vec(), width, combo_count, a_sum, b_sum, moment: a_sum / b_sum })
}

/// Source of multi-time moments for the characteristic functional.
///
/// Moments over separated windows must factor into the diagonal moments of
/// each window, as [`multi_time_moment`] does.
pub trait MomentProvider {
    fn width(&self) -> f64;
    fn moment(&self, times: &[f64]) -> Result<MultiTimeMoment>;
}

/// A [`PairSeries`] paired with an averaging width.
#[derive(Debug, Clone, Copy)]
pub struct WindowedPairs<'a> {
    pub series: &'a PairSeries,
    pub width: f64,
}

impl<'a> WindowedPairs<'a> {
    pub fn new(series: &'a PairSeries, width: f64) -> Result<Self> {
        WindowSpec::new(0.0, width)?;
        Ok(Self { series, width })
    }
}

impl MomentProvider for WindowedPairs<'_> {
    fn width(&self) -> f64 {
        self.width
    }

    fn moment(&self, times: &[f64]) -> Result<MultiTimeMoment> {
        multi_time_moment(self.series, times, self.width)
    }
}

/// Uniform time grid `start + k·step`, `k = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Grid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::InvalidGrid(format!("start {start} is not finite")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidGrid(format!("step {step} must be positive and finite")));
        }
        if len == 0 {
            return Err(Error::InvalidGrid("grid needs at least one point".into()));
        }
        Ok(Self { start, step, len })
    }

    pub fn point(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.point(k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharFunResult {
    pub grid: Grid,
    pub n_max: u32,
    pub value: Complex64,
    /// Contribution of each order `1..=n_max`.
    pub order_terms: Vec<Complex64>,
}

impl CharFunResult {
    /// `1 + Σ_{n≤k} term_n` for `k = 1..=n_max`.
    pub fn partial_sums(&self) -> Vec<Complex64> {
        let mut acc = Complex64::new(1.0, 0.0);
        self.order_terms
            .iter()
            .map(|t| {
                acc += t;
                acc
            })
            .collect()
    }
}

/// `iⁿ · c` for real `c`, exact.
pub fn i_pow_times(n: u32, c: f64) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(c, 0.0),
        1 => Complex64::new(0.0, c),
        2 => Complex64::new(-c, 0.0),
        _ => Complex64::new(0.0, -c),
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Truncated characteristic functional of test function `x` sampled on `grid`.
///
/// Points where `x` is zero contribute nothing and are never evaluated, so
/// `F(0) = 1` exactly for any grid. Since moments factor over separated
/// windows, the n-fold grid sum collapses to the order-`n` coefficient of
/// `Π_g Σ_k p(k; t_g)(x_g h)ᵏ/k!`, computed by truncated polynomial products.
pub fn charfun_truncated<P: MomentProvider + ?Sized>(provider: &P, grid: &Grid, x: &[f64], n_max: u32) -> Result<CharFunResult> {
    if n_max == 0 || n_max > MAX_DEGREE {
        return Err(Error::TruncationOrderOutOfRange { order: n_max, max: MAX_DEGREE });
    }
    if x.len() != grid.len {
        return Err(Error::InvalidGrid(format!("test function has {} values for {} grid points", x.len(), grid.len)));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid("test function values must be finite".into()));
    }
    let active: Vec<usize> = (0..grid.len).filter(|&g| x[g] != 0.0).collect();
    if n_max >= 2 {
        check_separated(active.iter().map(|&g| grid.point(g)), provider.width())?;
    }

    let order = n_max as usize;
    let mut coeffs = vec![0.0; order + 1];
    coeffs[0] = 1.0;
    let mut factor = vec![0.0; order + 1];
    for &g in &active {
        let t = grid.point(g);
        let xh = x[g] * grid.step;
        factor[0] = 1.0;
        for k in 1..=n_max {
            let times = vec![t; k as usize];
            let p = provider.moment(&times)?.moment;
            factor[k as usize] = p * xh.powi(k as i32) / factorial(k);
        }
        for n in (1..=order).rev() {
            let mut acc = CompensatedSum::new();
            for k in 0..=n {
                acc += coeffs[n - k] * factor[k];
            }
            coeffs[n] = acc.value();
        }
    }

    let order_terms: Vec<Complex64> = (1..=n_max).map(|n| i_pow_times(n, coeffs[n as usize])).collect();
    let mut value = Complex64::new(1.0, 0.0);
    for t in &order_terms {
        value += t;
    }
    Ok(CharFunResult { grid: *grid, n_max, value, order_terms })
}

/// Centered difference `[F(ε·δ_t) − F(−ε·δ_t)] / (2εh)` at grid point `index`,
/// which approximates `i·p(1;t)` with `O(ε²)` error.
pub fn charfun_derivative_check<P: MomentProvider + ?Sized>(
    provider: &P,
    grid: &Grid,
    index: usize,
    eps: f64,
    n_max: u32,
) -> Result<Complex64> {
    if index >= grid.len {
        return Err(Error::InvalidGrid(format!("point {index} outside grid of {}", grid.len)));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidGrid(format!("epsilon {eps} must be positive")));
    }
    if n_max < 2 {
        return Err(Error::TruncationOrderOutOfRange { order: n_max, max: MAX_DEGREE });
    }
    let mut x = vec![0.0; grid.len];
    x[index] = eps;
    let plus = charfun_truncated(provider, grid, &x, n_max)?.value;
    x[index] = -eps;
    let minus = charfun_truncated(provider, grid, &x, n_max)?.value;
    Ok((plus - minus) / (2.0 * eps * grid.step))
}
