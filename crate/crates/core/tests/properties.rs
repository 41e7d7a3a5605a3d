//! Randomised invariants over windows, moments, volatilities, the
//! characteristic functional and the file formats.

mod common;

use common::{rel, scaled};
use proptest::prelude::*;
use tickmoments::charfun::{charfun_truncated, multi_time_moment, Grid, PairSeries, WindowedPairs};
use tickmoments::ingest::{load_trades, write_trades, FileFormat, IngestSchema, SchemaVariant, TimestampUnit};
use tickmoments::price_moments::{price_moment, rolling_moments, vwap};
use tickmoments::price_volatility::price_volatility;
use tickmoments::returns::{build_returns, returns_volatility};
use tickmoments::sim::{simulate_rows, simulate_trades, SimConfig};
use tickmoments::trade::{select_window, validate_series};
use tickmoments::{TradeSeries, WindowSpec};

/// `(t, price, volume)` with integer timestamps so shifts stay exact.
fn trade_rows(max_len: usize) -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0u32..200, 1e-2f64..1e4, 1e-2f64..1e4), 1..max_len)
        .prop_map(|rows| rows.into_iter().map(|(t, p, v)| (t as f64, p * v, v)).collect())
}

fn series(rows: &[(f64, f64, f64)]) -> TradeSeries {
    validate_series(rows.iter().copied()).unwrap()
}

fn whole_span(s: &TradeSeries) -> WindowSpec {
    let (a, b) = s.time_span().unwrap();
    WindowSpec::new((a + b) / 2.0, (b - a).max(1.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn window_selection_is_idempotent(rows in trade_rows(60), center in 0.0f64..200.0, width in 0.5f64..100.0) {
        let s = series(&rows);
        let spec = WindowSpec::new(center, width).unwrap();
        let view = select_window(&s, spec);
        let restricted = s.restrict(&view);
        let again = select_window(&restricted, spec);
        prop_assert_eq!(again.members().len(), view.members().len());
        for (a, b) in again.trades().iter().zip(view.trades()) {
            prop_assert_eq!((a.timestamp, a.cost, a.volume), (b.timestamp, b.cost, b.volume));
        }
    }

    #[test]
    fn widening_never_removes_members(rows in trade_rows(60), center in 0.0f64..200.0, width in 0.5f64..100.0, extra in 0.0f64..50.0) {
        let s = series(&rows);
        let narrow = select_window(&s, WindowSpec::new(center, width).unwrap()).members();
        let wide = select_window(&s, WindowSpec::new(center, width + extra).unwrap()).members();
        prop_assert!(wide.start <= narrow.start || narrow.is_empty());
        prop_assert!(wide.end >= narrow.end || narrow.is_empty());
    }

    #[test]
    fn window_edges_are_members(rows in trade_rows(40), pick in any::<prop::sample::Index>(), half in 1u32..50, left in any::<bool>()) {
        let s = series(&rows);
        let t = s.trades()[pick.index(s.len())].timestamp;
        let half = half as f64;
        let center = if left { t + half } else { t - half };
        let spec = WindowSpec::new(center, 2.0 * half).unwrap();
        prop_assert!(select_window(&s, spec).trades().iter().any(|tr| tr.timestamp == t));
    }

    #[test]
    fn vwap_is_first_moment(rows in trade_rows(60)) {
        let s = series(&rows);
        let view = select_window(&s, whole_span(&s));
        prop_assert_eq!(vwap(&view).unwrap().to_bits(), price_moment(&view, 1).unwrap().to_bits());
    }

    #[test]
    fn volume_scale_invariance(rows in trade_rows(60), exp in -3i32..=3) {
        let lambda = 10f64.powi(exp);
        let s = series(&rows);
        let scaled_s = s.map_quantities(|c, v| (c * lambda, v * lambda)).unwrap();
        let (va, vb) = (select_window(&s, whole_span(&s)), select_window(&scaled_s, whole_span(&scaled_s)));
        for n in 1..=8 {
            prop_assert!(rel(price_moment(&va, n).unwrap(), price_moment(&vb, n).unwrap()) <= 1e-12);
        }
        let (a, b) = (price_volatility(&va).unwrap(), price_volatility(&vb).unwrap());
        prop_assert!(rel(a.sigma_p2_direct, b.sigma_p2_direct) <= 1e-10);
        prop_assert!(rel(a.sigma_p2_closed, b.sigma_p2_closed) <= 1e-10);
    }

    #[test]
    fn currency_covariance(rows in trade_rows(60), exp in -3i32..=3) {
        let lambda = 10f64.powi(exp);
        let s = series(&rows);
        let scaled_s = s.map_quantities(|c, v| (c * lambda, v)).unwrap();
        let (va, vb) = (select_window(&s, whole_span(&s)), select_window(&scaled_s, whole_span(&scaled_s)));
        for n in 1..=8 {
            let expected = price_moment(&va, n).unwrap() * lambda.powi(n as i32);
            prop_assert!(rel(expected, price_moment(&vb, n).unwrap()) <= 1e-12);
        }
        let (a, b) = (price_volatility(&va).unwrap(), price_volatility(&vb).unwrap());
        prop_assert!(rel(a.sigma_p2_direct * lambda * lambda, b.sigma_p2_direct) <= 1e-10);
        prop_assert!(rel(a.sigma_p2_closed * lambda * lambda, b.sigma_p2_closed) <= 1e-10);
    }

    #[test]
    fn constant_price_window(price in 1e-2f64..1e2, volumes in prop::collection::vec(1e-2f64..1e4, 1..60)) {
        let rows: Vec<_> = volumes.iter().enumerate().map(|(i, &v)| (i as f64, price * v, v)).collect();
        let s = series(&rows);
        let view = select_window(&s, whole_span(&s));
        for n in 1..=8 {
            prop_assert!(rel(price_moment(&view, n).unwrap(), price.powi(n as i32)) <= 1e-12);
        }
        let r = price_volatility(&view).unwrap();
        prop_assert!(r.sigma_p2_direct.abs() <= 1e-12);
        prop_assert!(r.sigma_p2_closed.abs() <= 1e-12);
    }

    #[test]
    fn price_identity_holds(rows in trade_rows(200)) {
        let s = series(&rows);
        let r = price_volatility(&select_window(&s, whole_span(&s))).unwrap();
        prop_assert!(scaled(r.sigma_p2_direct, r.sigma_p2_closed) <= 1e-10);
    }

    #[test]
    fn returns_identity_holds(rows in trade_rows(200), lag in 1usize..5) {
        let s = series(&rows);
        prop_assume!(lag < s.len());
        let rs = build_returns(&s, lag).unwrap();
        let rep = returns_volatility(rs.select_window(&whole_span(&s))).unwrap();
        prop_assert!(rep.max_deviation() <= 1e-10);
        prop_assert!(rel(rep.mean_return, rep.averages.r11) <= 1e-12 || (rep.mean_return - rep.averages.r11).abs() <= 1e-15);
    }

    #[test]
    fn time_shift_changes_nothing(rows in trade_rows(80), shift in -1000i32..1000, lag in 1usize..4) {
        let shift = shift as f64;
        let s = series(&rows);
        let shifted = series(&rows.iter().map(|&(t, c, v)| (t + shift, c, v)).collect::<Vec<_>>());
        let a = rolling_moments(&s, 7.0, 3.0, &[1, 2, 3]).unwrap();
        let b = rolling_moments(&shifted, 7.0, 3.0, &[1, 2, 3]).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.trade_count, y.trade_count);
            prop_assert_eq!(&x.entries, &y.entries);
        }
        let (wa, wb) = (whole_span(&s), whole_span(&shifted));
        let (pa, pb) = (price_volatility(&select_window(&s, wa)).unwrap(), price_volatility(&select_window(&shifted, wb)).unwrap());
        prop_assert_eq!(pa.sigma_p2_direct, pb.sigma_p2_direct);
        prop_assert_eq!(pa.sigma_p2_closed, pb.sigma_p2_closed);
        if lag < s.len() {
            let ra = returns_volatility(build_returns(&s, lag).unwrap().select_window(&wa)).unwrap();
            let rb = returns_volatility(build_returns(&shifted, lag).unwrap().select_window(&wb)).unwrap();
            prop_assert_eq!(ra.sigma_q2_direct, rb.sigma_q2_direct);
            prop_assert_eq!(ra.sigma_q2_rform, rb.sigma_q2_rform);
            prop_assert_eq!(ra.sigma_q2_closed, rb.sigma_q2_closed);
        }
    }

    #[test]
    fn diagonal_matches_single_window(rows in trade_rows(60), n in 1usize..=8, center in 0.0f64..200.0) {
        let s = series(&rows);
        let spec = WindowSpec::new(center, 40.0).unwrap();
        let view = select_window(&s, spec);
        prop_assume!(!view.is_empty());
        let pairs = PairSeries::from_trades(&s);
        let m = multi_time_moment(&pairs, &vec![center; n], 40.0).unwrap();
        prop_assert!(rel(m.moment, price_moment(&view, n as u32).unwrap()) <= 1e-12);
    }

    #[test]
    fn conjugate_symmetry(rows in trade_rows(60), x in prop::collection::vec(-0.01f64..0.01, 3), n_max in 1u32..=4) {
        // One anchor trade per grid window keeps every window populated.
        let anchors = [(20.0, 3.0, 2.0), (80.0, 5.0, 4.0), (140.0, 7.0, 1.0)];
        let s = series(&rows.iter().copied().chain(anchors).collect::<Vec<_>>());
        let pairs = PairSeries::from_trades(&s);
        let provider = WindowedPairs::new(&pairs, 10.0).unwrap();
        let grid = Grid::new(20.0, 60.0, 3).unwrap();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let a = charfun_truncated(&provider, &grid, &x, n_max).unwrap().value;
        let b = charfun_truncated(&provider, &grid, &neg, n_max).unwrap().value;
        prop_assert_eq!(a.re, b.re);
        prop_assert_eq!(a.im, -b.im);
    }

    #[test]
    fn files_round_trip(rows in trade_rows(60), ndjson in any::<bool>(), price_schema in any::<bool>()) {
        let s = series(&rows);
        let format = if ndjson { FileFormat::Ndjson } else { FileFormat::Csv };
        let variant = if price_schema { SchemaVariant::TsPriceVolume } else { SchemaVariant::TsCostVolume };
        let schema = IngestSchema { variant, unit: TimestampUnit::Seconds };
        // Price-schema files are written from a series that was itself loaded
        // from a price file.
        let start = if price_schema {
            let text: String = std::iter::once("ts,price,volume\n".to_string())
                .chain(rows.iter().map(|&(t, c, v)| format!("{t:?},{:?},{v:?}\n", c / v)))
                .collect();
            tickmoments::ingest::read_trades(text.as_bytes(), Some(FileFormat::Csv), schema).unwrap()
        } else {
            s
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(if ndjson { "t.ndjson" } else { "t.csv" });
        write_trades(std::fs::File::create(&path).unwrap(), &start, format, schema).unwrap();
        prop_assert_eq!(load_trades(&path, schema).unwrap(), start);
    }

    #[test]
    fn simulation_is_seed_deterministic(seed in any::<u64>(), n in 1usize..300) {
        let cfg = SimConfig { n_trades: n, seed, sigma_step: 0.01, ..SimConfig::default() };
        let a = simulate_rows(&cfg).unwrap();
        let b = simulate_rows(&cfg).unwrap();
        prop_assert_eq!(&a, &b);
        let s = simulate_trades(&cfg).unwrap();
        prop_assert_eq!(s.len(), n);
    }
}

#[test]
fn simulation_ignores_thread_pool_size() {
    let cfg = SimConfig { n_trades: 500, seed: 9, ..SimConfig::default() };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| simulate_trades(&cfg).unwrap());
    let b = four.install(|| simulate_trades(&cfg).unwrap());
    assert_eq!(a, b);
    let ra = one.install(|| rolling_moments(&a, 20.0, 5.0, &[1, 2]).unwrap());
    let rb = four.install(|| rolling_moments(&b, 20.0, 5.0, &[1, 2]).unwrap());
    assert_eq!(ra, rb);
}
