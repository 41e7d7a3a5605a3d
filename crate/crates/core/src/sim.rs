//! Reproducible synthetic trades.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded through
//! `seed_from_u64`. Per trade, draws happen in a fixed order:
//!
//! 1. inter-arrival time `Exp(arrival_rate)` (skipped for the first trade),
//! 2. standard normal `z` for the log-price step (skipped for the first trade),
//! 3. volume `LogNormal(volume_mu, volume_sigma)`.
//!
//! Price follows `pₖ = pₖ₋₁·exp(sigma_step·z)` from `initial_price`, and
//! cost is `price · volume`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trade::{validate_series, TradeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_trades: usize,
    pub seed: u64,
    pub start_time: f64,
    pub initial_price: f64,
    /// Scale of the per-trade log-price increment. Zero gives a constant price.
    pub sigma_step: f64,
    pub volume_mu: f64,
    pub volume_sigma: f64,
    /// Trades per second.
    pub arrival_rate: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_trades: 1000,
            seed: 42,
            start_time: 0.0,
            initial_price: 100.0,
            sigma_step: 1e-3,
            volume_mu: 0.0,
            volume_sigma: 1.0,
            arrival_rate: 1.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSimConfig(msg.to_string()));
        if self.n_trades == 0 {
            return bad("n_trades must be at least 1");
        }
        if !self.start_time.is_finite() {
            return bad("start_time must be finite");
        }
        if !(self.initial_price > 0.0 && self.initial_price.is_finite()) {
            return bad("initial_price must be positive");
        }
        if !(self.sigma_step >= 0.0 && self.sigma_step.is_finite()) {
            return bad("sigma_step must be non-negative");
        }
        if !self.volume_mu.is_finite() || !(self.volume_sigma >= 0.0 && self.volume_sigma.is_finite()) {
            return bad("volume law needs a finite location and a non-negative scale");
        }
        if !(self.arrival_rate > 0.0 && self.arrival_rate.is_finite()) {
            return bad("arrival_rate must be positive");
        }
        Ok(())
    }
}

/// One generated trade before cost is formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulatedTrade {
    pub timestamp: f64,
    pub price: f64,
    pub volume: f64,
}

/// Raw generated `(timestamp, price, volume)` rows; timestamps strictly increase.
pub fn simulate_rows(config: &SimConfig) -> Result<Vec<SimulatedTrade>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let arrivals = Exp::new(config.arrival_rate).map_err(|e| Error::InvalidSimConfig(e.to_string()))?;
    let volumes =
        LogNormal::new(config.volume_mu, config.volume_sigma).map_err(|e| Error::InvalidSimConfig(e.to_string()))?;

    let mut out = Vec::with_capacity(config.n_trades);
    let (mut t, mut price) = (config.start_time, config.initial_price);
    for k in 0..config.n_trades {
        if k > 0 {
            let next = t + arrivals.sample(&mut rng);
            t = if next > t { next } else { t.next_up() };
            let z: f64 = rng.sample(StandardNormal);
            price *= (config.sigma_step * z).exp();
        }
        let volume = volumes.sample(&mut rng);
        out.push(SimulatedTrade { timestamp: t, price, volume });
    }
    Ok(out)
}

/// Simulated series with `cost = price · volume`.
pub fn simulate_trades(config: &SimConfig) -> Result<TradeSeries> {
    let rows = simulate_rows(config)?;
    validate_series(rows.into_iter().map(|r| (r.timestamp, r.price * r.volume, r.volume)))
}
