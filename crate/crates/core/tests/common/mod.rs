//! Naive reference implementations used as oracles.
//!
//! Everything here works from raw `(t, cost, volume)` tuples with plain
//! loops and plain `+=`. Nothing calls into the library's computation paths.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use tickmoments::trade::{validate_series, TradeSeries};

pub type Row = (f64, f64, f64);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rows with log-normal prices and volumes spanning several decades.
pub fn lognormal_rows(rng: &mut ChaCha8Rng, n: usize, price_median: f64, volume_median: f64, log_sigma: f64) -> Vec<Row> {
    let prices = LogNormal::new(price_median.ln(), log_sigma).unwrap();
    let volumes = LogNormal::new(volume_median.ln(), log_sigma).unwrap();
    (0..n)
        .map(|i| {
            let p = prices.sample(rng);
            let v = volumes.sample(rng);
            (i as f64, p * v, v)
        })
        .collect()
}

/// Window size drawn log-uniformly from `[lo, hi]`.
pub fn log_uniform_size(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    let (a, b) = ((lo as f64).ln(), (hi as f64 + 1.0).ln());
    (rng.random_range(a..b).exp().floor() as usize).clamp(lo, hi)
}

pub fn series(rows: &[Row]) -> TradeSeries {
    validate_series(rows.iter().copied()).unwrap()
}

pub fn in_window(rows: &[Row], center: f64, width: f64) -> Vec<Row> {
    rows.iter().copied().filter(|r| center - width / 2.0 <= r.0 && r.0 <= center + width / 2.0).collect()
}

pub fn pow(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

pub fn naive_aggregate(rows: &[Row], n: u32) -> (f64, f64) {
    let (mut c, mut v) = (0.0, 0.0);
    for r in rows {
        c += pow(r.1, n);
        v += pow(r.2, n);
    }
    (c, v)
}

pub fn naive_moment(rows: &[Row], n: u32) -> f64 {
    let (c, v) = naive_aggregate(rows, n);
    c / v
}

pub fn naive_simple_average(rows: &[Row]) -> f64 {
    let mut s = 0.0;
    for r in rows {
        s += r.1 / r.2;
    }
    s / rows.len() as f64
}

pub fn naive_vol_direct(rows: &[Row]) -> f64 {
    let p1 = naive_moment(rows, 1);
    naive_moment(rows, 2) - p1 * p1
}

fn mean(xs: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in xs {
        s += x;
    }
    s / xs.len() as f64
}

/// Two-pass centred variance; an independent route to `⟨x²⟩ − ⟨x⟩²`.
fn centred_var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let mut s = 0.0;
    for x in xs {
        s += (x - m) * (x - m);
    }
    s / xs.len() as f64
}

/// `(σ_a², φ_a², σ_b², φ_b²)` from two-pass statistics.
pub fn naive_dispersions(a: &[f64], b: &[f64]) -> (f64, f64, f64, f64) {
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (centred_var(a), centred_var(b));
    (va, va + 2.0 * ma * ma, vb, vb + 2.0 * mb * mb)
}

pub fn naive_closed(a: &[f64], b: &[f64]) -> f64 {
    let (sa, pa, sb, pb) = naive_dispersions(a, b);
    2.0 * (pb * sa - pa * sb) / (pb * pb - sb * sb)
}

pub fn naive_price_vol_closed(rows: &[Row]) -> f64 {
    let c: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let v: Vec<f64> = rows.iter().map(|r| r.2).collect();
    naive_closed(&c, &v)
}

/// `(t_i, q_c, q_v)` for every `i ≥ m` of time-sorted rows.
pub fn naive_returns(sorted_rows: &[Row], m: usize) -> Vec<Row> {
    let mut out = Vec::new();
    for i in m..sorted_rows.len() {
        let (later, earlier) = (sorted_rows[i], sorted_rows[i - m]);
        out.push((later.0, later.1 / earlier.1, later.2 / earlier.2));
    }
    out
}

/// Returns volatility via the r-averages, from `(t, q_c, q_v)` triples.
pub fn naive_returns_rform(recs: &[Row]) -> f64 {
    let (mut v1, mut v2, mut s11, mut s21, mut s22) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(_, qc, qv) in recs {
        let r = qc / qv - 1.0;
        v1 += qv;
        v2 += qv * qv;
        s11 += r * qv;
        s21 += r * qv * qv;
        s22 += r * r * qv * qv;
    }
    let (r11, r21, r22) = (s11 / v1, s21 / v2, s22 / v2);
    r22 - r11 * r11 + 2.0 * (r21 - r11)
}

/// Multi-time moment by explicit enumeration of trade combinations: slots
/// sharing a time reuse the same trade, distinct times range independently
/// over their own windows.
pub fn brute_multi_time(points: &[Row], times: &[f64], width: f64) -> f64 {
    let mut distinct: Vec<(f64, u32)> = Vec::new();
    for &t in times {
        match distinct.iter_mut().find(|d| d.0 == t) {
            Some(d) => d.1 += 1,
            None => distinct.push((t, 1)),
        }
    }
    let members: Vec<Vec<Row>> = distinct.iter().map(|&(t, _)| in_window(points, t, width)).collect();
    let mut choice = vec![0usize; distinct.len()];
    let (mut a_sum, mut b_sum) = (0.0, 0.0);
    loop {
        let (mut a, mut b) = (1.0, 1.0);
        for (g, &(_, k)) in distinct.iter().enumerate() {
            let r = members[g][choice[g]];
            a *= pow(r.1, k);
            b *= pow(r.2, k);
        }
        a_sum += a;
        b_sum += b;
        // odometer
        let mut g = 0;
        loop {
            if g == choice.len() {
                return a_sum / b_sum;
            }
            choice[g] += 1;
            if choice[g] < members[g].len() {
                break;
            }
            choice[g] = 0;
            g += 1;
        }
    }
}

/// Left-point Riemann discretisation of the truncated characteristic
/// functional by nested loops over every ordered tuple of grid points.
pub fn brute_charfun(points: &[Row], width: f64, grid: &[f64], h: f64, x: &[f64], n_max: u32) -> (f64, f64) {
    let (mut re, mut im) = (1.0, 0.0);
    let mut fact = 1.0;
    for n in 1..=n_max {
        fact *= n as f64;
        let mut idx = vec![0usize; n as usize];
        let mut total = 0.0;
        'tuples: loop {
            let mut weight = 1.0;
            for &g in &idx {
                weight *= x[g] * h;
            }
            if weight != 0.0 {
                let times: Vec<f64> = idx.iter().map(|&g| grid[g]).collect();
                total += brute_multi_time(points, &times, width) * weight;
            }
            let mut j = 0;
            loop {
                if j == idx.len() {
                    break 'tuples;
                }
                idx[j] += 1;
                if idx[j] < grid.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
        let c = total / fact;
        match n % 4 {
            0 => re += c,
            1 => im += c,
            2 => re -= c,
            _ => im -= c,
        }
    }
    (re, im)
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// `|a − b| / max(1, |a|)`.
pub fn scaled(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}
