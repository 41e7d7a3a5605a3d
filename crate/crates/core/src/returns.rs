//! Lag-m returns of price, cost and volume, and the returns moments and
//! volatilities built from them.
//!
//! A record pairs trade `i` with trade `i − m` by series index (the m-th
//! previous trade, not a clock offset). A record belongs to a window when the
//! later trade's timestamp `tᵢ` does; its partner may lie outside.
//!
//! Returns volatility `Σ_q² = q_p(2) − q_p(1)²` is available in three forms:
//! direct, through the simple-return averages `r11`, `r21`, `r22`, and in
//! closed form through per-record dispersions of the cost and volume ratios.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::check_degree;
use crate::error::{Error, Result};
use crate::price_volatility::{closed_form, pair_dispersion, scaled_deviation, second_moment_difference};
use crate::sum::{CompensatedSum, DoubleDouble};
use crate::trade::{window_range, TradeSeries, WindowSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnsRecord {
    /// Series index of the later trade.
    pub index: usize,
    pub lag: usize,
    pub timestamp: f64,
    /// `p(tᵢ) / p(tᵢ₋ₘ)`
    pub q_p: f64,
    /// Simple return `q_p − 1`.
    pub r: f64,
    /// Log return `ln q_p`.
    pub log_r: f64,
    /// `C(tᵢ) / C(tᵢ₋ₘ)`
    pub q_c: f64,
    /// `V(tᵢ) / V(tᵢ₋ₘ)`
    pub q_v: f64,
}

/// Log return of a record, `ln q_p`.
pub fn log_return(record: &ReturnsRecord) -> f64 {
    record.q_p.ln()
}

/// All lag-m records of a series, time-ordered by `tᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsSeries {
    lag: usize,
    records: Vec<ReturnsRecord>,
}

impl ReturnsSeries {
    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn records(&self) -> &[ReturnsRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records whose `tᵢ` falls in the window.
    pub fn select_window(&self, spec: &WindowSpec) -> &[ReturnsRecord] {
        &self.records[self.window_range(spec)]
    }

    pub fn window_range(&self, spec: &WindowSpec) -> Range<usize> {
        window_range(&self.records, spec, |r| r.timestamp)
    }
}

/// Builds one record per trade index `i ≥ m`.
pub fn build_returns(series: &TradeSeries, m: usize) -> Result<ReturnsSeries> {
    if m == 0 {
        return Err(Error::ZeroLag);
    }
    if m >= series.len() {
        return Err(Error::LagTooLarge { lag: m, len: series.len() });
    }
    let trades = series.trades();
    let records = trades
        .iter()
        .zip(&trades[m..])
        .map(|(earlier, later)| {
            let q_p = later.price() / earlier.price();
            ReturnsRecord {
                index: later.index,
                lag: m,
                timestamp: later.timestamp,
                q_p,
                r: q_p - 1.0,
                log_r: q_p.ln(),
                q_c: later.cost / earlier.cost,
                q_v: later.volume / earlier.volume,
            }
        })
        .collect();
    Ok(ReturnsSeries { lag: m, records })
}

fn require_records(records: &[ReturnsRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyWindow);
    }
    Ok(())
}

/// `Q_C(n) = Σ q_cⁿ` and `Q_V(n) = Σ q_vⁿ`.
pub fn returns_aggregate(records: &[ReturnsRecord], n: u32) -> Result<(f64, f64)> {
    require_records(records)?;
    check_degree(n)?;
    let exp = n as i32;
    let mut qc = CompensatedSum::new();
    let mut qv = CompensatedSum::new();
    for r in records {
        qc += r.q_c.powi(exp);
        qv += r.q_v.powi(exp);
    }
    Ok((qc.value(), qv.value()))
}

/// `q_p(n) = Q_C(n) / Q_V(n)`. Degree 1 is the volume-returns-weighted
/// average, degree 2 its squared-volume counterpart.
pub fn returns_moment(records: &[ReturnsRecord], n: u32) -> Result<f64> {
    returns_aggregate(records, n).map(|(c, v)| c / v)
}

/// `q_p(2) − q_p(1)²`.
pub fn returns_volatility_direct(records: &[ReturnsRecord]) -> Result<f64> {
    require_records(records)?;
    Ok(second_moment_difference(records.iter().map(|r| (r.q_c, r.q_v))))
}

/// Simple-return weighted averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnAverages {
    /// `Σ r·q_v / Q_V(1)`; equals `q_p(1) − 1`.
    pub r11: f64,
    /// `Σ r·q_v² / Q_V(2)`
    pub r21: f64,
    /// `Σ r²·q_v² / Q_V(2)`
    pub r22: f64,
}

struct WideAverages {
    r11: DoubleDouble,
    r21: DoubleDouble,
    r22: DoubleDouble,
}

impl WideAverages {
    fn volatility(&self) -> f64 {
        let two = DoubleDouble::new(2.0);
        (self.r22 - self.r11 * self.r11 + two * (self.r21 - self.r11)).value()
    }

    fn rounded(&self) -> ReturnAverages {
        ReturnAverages { r11: self.r11.value(), r21: self.r21.value(), r22: self.r22.value() }
    }
}

fn wide_averages(records: &[ReturnsRecord]) -> Result<WideAverages> {
    require_records(records)?;
    let zero = DoubleDouble::ZERO;
    let (mut v1, mut v2, mut s11, mut s21, mut s22) = (zero, zero, zero, zero, zero);
    for rec in records {
        let v_sq = DoubleDouble::product(rec.q_v, rec.q_v);
        let r_v = DoubleDouble::product(rec.r, rec.q_v);
        v1 += rec.q_v;
        v2 += v_sq;
        s11 += r_v;
        s21 += v_sq * DoubleDouble::new(rec.r);
        s22 += r_v * r_v;
    }
    Ok(WideAverages { r11: s11 / v1, r21: s21 / v2, r22: s22 / v2 })
}

pub fn return_averages(records: &[ReturnsRecord]) -> Result<ReturnAverages> {
    wide_averages(records).map(|w| w.rounded())
}

/// `r22 − r11² + 2(r21 − r11)`.
pub fn returns_volatility_rform(records: &[ReturnsRecord]) -> Result<f64> {
    wide_averages(records).map(|w| w.volatility())
}

/// Per-record means and dispersions of the cost and volume ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnsDispersionStats {
    pub n_records: usize,
    pub qc_mean: DoubleDouble,
    pub qc_sq_mean: DoubleDouble,
    pub qv_mean: DoubleDouble,
    pub qv_sq_mean: DoubleDouble,
    /// `Ω_c² = ⟨q_c²⟩ − ⟨q_c⟩²`
    pub omega_c2: DoubleDouble,
    pub omega_v2: DoubleDouble,
    /// `Φ_c² = ⟨q_c²⟩ + ⟨q_c⟩²`
    pub phi_c2: DoubleDouble,
    pub phi_v2: DoubleDouble,
}

pub fn returns_dispersion_stats(records: &[ReturnsRecord]) -> Result<ReturnsDispersionStats> {
    require_records(records)?;
    let d = pair_dispersion(records.iter().map(|r| (r.q_c, r.q_v)));
    Ok(ReturnsDispersionStats {
        n_records: d.n,
        qc_mean: d.a_mean,
        qc_sq_mean: d.a_sq_mean,
        qv_mean: d.b_mean,
        qv_sq_mean: d.b_sq_mean,
        omega_c2: d.sigma_a2,
        omega_v2: d.sigma_b2,
        phi_c2: d.phi_a2,
        phi_v2: d.phi_b2,
    })
}

/// `2(Φ_v²Ω_c² − Φ_c²Ω_v²) / (Φ_v⁴ − Ω_v⁴)`.
pub fn returns_volatility_closed(stats: &ReturnsDispersionStats) -> Result<f64> {
    closed_form(stats.omega_c2, stats.phi_c2, stats.omega_v2, stats.phi_v2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnsVolatilityReport {
    pub n_records: usize,
    /// `q_p(1) − 1`
    pub mean_return: f64,
    pub sigma_q2_direct: f64,
    pub sigma_q2_rform: f64,
    pub sigma_q2_closed: f64,
    pub averages: ReturnAverages,
    pub stats: ReturnsDispersionStats,
    pub negative_flag: bool,
}

impl ReturnsVolatilityReport {
    /// Largest pairwise scaled deviation among the three forms.
    pub fn max_deviation(&self) -> f64 {
        let (d, r, c) = (self.sigma_q2_direct, self.sigma_q2_rform, self.sigma_q2_closed);
        scaled_deviation(d, r).max(scaled_deviation(d, c)).max(scaled_deviation(r, c))
    }
}

pub fn returns_volatility(records: &[ReturnsRecord]) -> Result<ReturnsVolatilityReport> {
    let wide = wide_averages(records)?;
    let stats = returns_dispersion_stats(records)?;
    let direct = returns_volatility_direct(records)?;
    let rform = wide.volatility();
    let closed = returns_volatility_closed(&stats)?;
    let averages = wide.rounded();
    Ok(ReturnsVolatilityReport {
        n_records: records.len(),
        mean_return: returns_moment(records, 1)? - 1.0,
        sigma_q2_direct: direct,
        sigma_q2_rform: rform,
        sigma_q2_closed: closed,
        averages,
        stats,
        negative_flag: direct < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trade::validate_series;

    fn fixture() -> ReturnsSeries {
        let s = validate_series([(0.0, 4.0, 2.0), (1.0, 6.0, 2.0), (2.0, 9.0, 3.0)]).unwrap();
        build_returns(&s, 1).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn builds_lag_one_records() {
        let rs = fixture();
        let r = rs.records();
        assert_eq!(r.len(), 2);
        assert_eq!((r[0].index, r[0].q_p, r[0].r, r[0].q_c, r[0].q_v), (1, 1.5, 0.5, 1.5, 1.0));
        assert_eq!((r[1].index, r[1].q_p, r[1].r, r[1].q_c, r[1].q_v), (2, 1.0, 0.0, 1.5, 1.5));
        assert_eq!(r[0].q_c, r[0].q_p * r[0].q_v);
        assert_eq!(r[1].q_c, r[1].q_p * r[1].q_v);
    }

    #[test]
    fn identical_partner_gives_unit_ratios() {
        let s = validate_series([(0.0, 4.0, 2.0), (1.0, 4.0, 2.0)]).unwrap();
        let r = build_returns(&s, 1).unwrap().records()[0];
        assert_eq!((r.q_p, r.q_c, r.q_v, r.r, r.log_r), (1.0, 1.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn lag_bounds() {
        let s = validate_series([(0.0, 4.0, 2.0), (1.0, 4.0, 2.0)]).unwrap();
        assert!(matches!(build_returns(&s, 2), Err(Error::LagTooLarge { lag: 2, len: 2 })));
        assert!(matches!(build_returns(&s, 0), Err(Error::ZeroLag)));
    }

    #[test]
    fn pairs_by_global_index() {
        let s = validate_series((0..6).map(|i| (i as f64, 1.0 + i as f64, 1.0))).unwrap();
        let rs = build_returns(&s, 2).unwrap();
        assert_eq!(rs.len(), 4);
        assert_eq!(rs.records()[0].index, 2);
        assert_eq!(rs.records()[0].q_p, 3.0);
        // partner of the record at t=2 lies at t=0, outside [1.5, 2.5]
        let w = rs.select_window(&WindowSpec::new(2.0, 1.0).unwrap());
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].q_c, 3.0);
    }

    #[test]
    fn log_returns() {
        let rec = |q_p: f64| ReturnsRecord { index: 1, lag: 1, timestamp: 0.0, q_p, r: q_p - 1.0, log_r: 0.0, q_c: q_p, q_v: 1.0 };
        assert_eq!(log_return(&rec(1.0)), 0.0);
        assert!(close(log_return(&rec(std::f64::consts::E)), 1.0, 1e-15));
        assert!(close(log_return(&rec(1.5)), 0.405465108108, 1e-12));
    }

    #[test]
    fn aggregates_and_moments() {
        let rs = fixture();
        let r = rs.records();
        assert_eq!(returns_aggregate(r, 1).unwrap(), (3.0, 2.5));
        assert_eq!(returns_aggregate(r, 2).unwrap(), (4.5, 3.25));
        assert_eq!(returns_aggregate(&r[..1], 3).unwrap(), (1.5f64.powi(3), 1.0));
        assert_eq!(returns_moment(r, 1).unwrap(), 1.2);
        assert!(close(returns_moment(r, 2).unwrap(), 1.384615384615, 1e-12));
    }

    #[test]
    fn three_forms_on_fixture() {
        let rs = fixture();
        let rep = returns_volatility(rs.records()).unwrap();
        let expected = 4.5 / 3.25 - 1.44;
        assert!(close(rep.sigma_q2_direct, expected, 1e-14));
        assert!(close(rep.sigma_q2_rform, expected, 1e-14));
        assert!(close(rep.sigma_q2_closed, -0.5625 / 10.15625, 1e-14));
        assert!(close(rep.sigma_q2_direct, -0.0553846154, 1e-10));
        assert!(close(rep.mean_return, 0.2, 1e-15));
        assert!(close(rep.averages.r11, 0.2, 1e-15));
        assert!(close(rep.averages.r21, 0.5 / 3.25, 1e-15));
        assert!(close(rep.averages.r22, 0.25 / 3.25, 1e-15));
        assert!(rep.negative_flag);
        let st = rep.stats;
        let v = |x: DoubleDouble| x.value();
        assert_eq!((v(st.qc_mean), v(st.qc_sq_mean), v(st.omega_c2), v(st.phi_c2)), (1.5, 2.25, 0.0, 4.5));
        assert_eq!((v(st.qv_mean), v(st.qv_sq_mean), v(st.omega_v2), v(st.phi_v2)), (1.25, 1.625, 0.0625, 3.1875));
        assert_eq!(returns_volatility_rform(rs.records()).unwrap(), rep.sigma_q2_rform);
    }

    #[test]
    fn unit_ratios_give_zero_volatility() {
        let s = validate_series((0..5).map(|i| (i as f64, 4.0, 2.0))).unwrap();
        let rs = build_returns(&s, 1).unwrap();
        let rep = returns_volatility(rs.records()).unwrap();
        assert_eq!((rep.sigma_q2_direct, rep.sigma_q2_rform, rep.sigma_q2_closed), (0.0, 0.0, 0.0));
        assert_eq!(returns_moment(rs.records(), 5).unwrap(), 1.0);
    }

    #[test]
    fn single_record_gives_zero_volatility() {
        let rs = fixture();
        let rep = returns_volatility(&rs.records()[..1]).unwrap();
        assert_eq!(rep.sigma_q2_direct, 0.0);
        assert!(rep.sigma_q2_rform.abs() < 1e-15);
        assert_eq!(rep.sigma_q2_closed, 0.0);
    }

    #[test]
    fn empty_records_error() {
        assert!(matches!(returns_volatility(&[]), Err(Error::EmptyWindow)));
        assert!(matches!(returns_aggregate(&[], 1), Err(Error::EmptyWindow)));
        assert!(matches!(returns_aggregate(fixture().records(), 40), Err(Error::DegreeOutOfRange { .. })));
    }
}
