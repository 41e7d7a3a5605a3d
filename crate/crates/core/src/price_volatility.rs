//! Price volatility `σ_p² = p(2;t) − p(1;t)²`, directly and through the
//! dispersions of per-trade cost and volume.
//!
//! With per-trade means `C₁ = ⟨C⟩`, `C₂ = ⟨C²⟩` (likewise `V₁`, `V₂`):
//!
//! ```text
//! σ_C² = C₂ − C₁²    φ_C² = C₂ + C₁²    (same for V)
//! σ_p² = 2(φ_V²σ_C² − φ_C²σ_V²) / (φ_V⁴ − σ_V⁴)
//! ```
//!
//! The denominator equals `4V₁²V₂` and is strictly positive for any
//! non-empty window. `σ_p²` is signed: `p(1)` and `p(2)` weight trades by `V`
//! and `V²` respectively, so a window whose heavy trades sit at low prices can
//! produce a negative value. Such values are reported and flagged, never clamped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::DoubleDouble;
use crate::trade::{WindowSpec, WindowView};

/// Relative floor under which negative rounding residue in a dispersion is reset to zero.
pub const DISPERSION_FLOOR: f64 = 1e-12;

/// Clamps `[−floor·max(second_moment, 1), 0)` to zero and leaves anything else alone.
pub(crate) fn clamp_residue(dispersion: DoubleDouble, second_moment: DoubleDouble) -> DoubleDouble {
    let floor = DISPERSION_FLOOR * second_moment.value().max(1.0);
    let d = dispersion.value();
    if d < 0.0 && d >= -floor {
        DoubleDouble::ZERO
    } else {
        dispersion
    }
}

/// Means, dispersions and companions of a cost-like `a` and volume-like `b`.
pub(crate) struct PairDispersion {
    pub n: usize,
    pub a_mean: DoubleDouble,
    pub a_sq_mean: DoubleDouble,
    pub b_mean: DoubleDouble,
    pub b_sq_mean: DoubleDouble,
    pub sigma_a2: DoubleDouble,
    pub sigma_b2: DoubleDouble,
    pub phi_a2: DoubleDouble,
    pub phi_b2: DoubleDouble,
}

/// Uncentred per-item statistics in double-double precision.
pub(crate) fn pair_dispersion(items: impl Iterator<Item = (f64, f64)>) -> PairDispersion {
    let (mut a1, mut a2, mut b1, mut b2) = (DoubleDouble::ZERO, DoubleDouble::ZERO, DoubleDouble::ZERO, DoubleDouble::ZERO);
    let mut n = 0usize;
    for (a, b) in items {
        a1 += a;
        a2 += DoubleDouble::product(a, a);
        b1 += b;
        b2 += DoubleDouble::product(b, b);
        n += 1;
    }
    let nf = n as f64;
    let (a_mean, a_sq_mean) = (a1.div_f64(nf), a2.div_f64(nf));
    let (b_mean, b_sq_mean) = (b1.div_f64(nf), b2.div_f64(nf));
    let (am2, bm2) = (a_mean * a_mean, b_mean * b_mean);
    PairDispersion {
        n,
        a_mean,
        a_sq_mean,
        b_mean,
        b_sq_mean,
        sigma_a2: clamp_residue(a_sq_mean - am2, a_sq_mean),
        sigma_b2: clamp_residue(b_sq_mean - bm2, b_sq_mean),
        phi_a2: a_sq_mean + am2,
        phi_b2: b_sq_mean + bm2,
    }
}

/// `Σa²/Σb² − (Σa/Σb)²`, formed in double-double and rounded once.
pub(crate) fn second_moment_difference(items: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut a1, mut a2, mut b1, mut b2) = (DoubleDouble::ZERO, DoubleDouble::ZERO, DoubleDouble::ZERO, DoubleDouble::ZERO);
    for (a, b) in items {
        a1 += a;
        a2 += DoubleDouble::product(a, a);
        b1 += b;
        b2 += DoubleDouble::product(b, b);
    }
    // (a2·b1² − a1²·b2) / (b2·b1²): one rounded division, exact zero when
    // every ratio a/b coincides term by term.
    let b1_sq = b1 * b1;
    ((a2 * b1_sq - a1 * a1 * b2) / (b2 * b1_sq)).value()
}

/// `2(φ_b²·σ_a² − φ_a²·σ_b²) / (φ_b⁴ − σ_b⁴)`.
pub(crate) fn closed_form(sigma_a2: DoubleDouble, phi_a2: DoubleDouble, sigma_b2: DoubleDouble, phi_b2: DoubleDouble) -> Result<f64> {
    let denom = (phi_b2 - sigma_b2) * (phi_b2 + sigma_b2);
    if denom.value().is_nan() || denom.value() <= 0.0 {
        return Err(Error::DegenerateDenominator { value: denom.value() });
    }
    let numer = phi_b2 * sigma_a2 - phi_a2 * sigma_b2;
    Ok((numer / denom).value() * 2.0)
}

/// Per-trade means and dispersions of cost and volume in one window, kept in
/// double-double so the closed form can be evaluated without cancellation loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeDispersionStats {
    pub n_trades: usize,
    /// `C₁`
    pub cost_mean: DoubleDouble,
    /// `C₂`
    pub cost_sq_mean: DoubleDouble,
    pub volume_mean: DoubleDouble,
    pub volume_sq_mean: DoubleDouble,
    /// `σ_C² = C₂ − C₁²`
    pub sigma_c2: DoubleDouble,
    pub sigma_v2: DoubleDouble,
    /// `φ_C² = C₂ + C₁²`
    pub phi_c2: DoubleDouble,
    pub phi_v2: DoubleDouble,
}

/// Result of both volatility routes over one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceVolatilityReport {
    pub window: WindowSpec,
    pub n_trades: usize,
    pub sigma_p2_direct: f64,
    pub sigma_p2_closed: f64,
    pub stats: TradeDispersionStats,
    pub negative_flag: bool,
}

impl PriceVolatilityReport {
    /// `|direct − closed| / max(1, |direct|)`.
    pub fn deviation(&self) -> f64 {
        scaled_deviation(self.sigma_p2_direct, self.sigma_p2_closed)
    }
}

/// `|a − b| / max(1, |a|)`: relative above unit magnitude, absolute below.
pub fn scaled_deviation(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

pub fn dispersion_stats(view: &WindowView<'_>) -> Result<TradeDispersionStats> {
    if view.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let d = pair_dispersion(view.trades().iter().map(|t| (t.cost, t.volume)));
    Ok(TradeDispersionStats {
        n_trades: d.n,
        cost_mean: d.a_mean,
        cost_sq_mean: d.a_sq_mean,
        volume_mean: d.b_mean,
        volume_sq_mean: d.b_sq_mean,
        sigma_c2: d.sigma_a2,
        sigma_v2: d.sigma_b2,
        phi_c2: d.phi_a2,
        phi_v2: d.phi_b2,
    })
}

/// `p(2;t) − p(1;t)²` with `p(n;t) = ΣCⁿ/ΣVⁿ`.
pub fn price_volatility_direct(view: &WindowView<'_>) -> Result<f64> {
    if view.is_empty() {
        return Err(Error::EmptyWindow);
    }
    Ok(second_moment_difference(view.trades().iter().map(|t| (t.cost, t.volume))))
}

/// `2(φ_V²σ_C² − φ_C²σ_V²) / (φ_V⁴ − σ_V⁴)`.
pub fn price_volatility_closed(stats: &TradeDispersionStats) -> Result<f64> {
    closed_form(stats.sigma_c2, stats.phi_c2, stats.sigma_v2, stats.phi_v2)
}

pub fn price_volatility(view: &WindowView<'_>) -> Result<PriceVolatilityReport> {
    let stats = dispersion_stats(view)?;
    let direct = price_volatility_direct(view)?;
    let closed = price_volatility_closed(&stats)?;
    Ok(PriceVolatilityReport {
        window: view.spec(),
        n_trades: stats.n_trades,
        sigma_p2_direct: direct,
        sigma_p2_closed: closed,
        stats,
        negative_flag: direct < 0.0,
    })
}
