use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use tickmoments::charfun::{charfun_truncated, Grid, PairSeries, WindowedPairs};
use tickmoments::identity::{check_identities, IdentityStat, IDENTITY_TOLERANCE};
use tickmoments::ingest::{load_trades, write_rows, IngestSchema, SchemaVariant};
use tickmoments::price_moments::rolling_moments;
use tickmoments::price_volatility::price_volatility;
use tickmoments::returns::{build_returns, returns_volatility};
use tickmoments::sim::{simulate_rows, simulate_trades};
use tickmoments::trade::{rolling_windows, select_window};
use tickmoments::{TradeSeries, WindowSpec};

use crate::args::{
    CharfunArgs, IdentityArgs, InputArgs, MomentsArgs, OutputArgs, PriceVolArgs, ReturnsVolArgs, SimulateArgs, Source,
    WindowArgs,
};
use crate::table::{Cell, Table};
use crate::Usage;

/// Exit status of a command that ran to completion.
pub type Status = u8;

pub const OK: Status = 0;
pub const IDENTITY_FAILED: Status = 1;

fn load(input: &InputArgs) -> Result<TradeSeries> {
    load_trades(&input.input, input.schema.ingest_schema())
        .with_context(|| format!("reading {}", input.input.display()))
}

/// Validates width and stride before any input is touched.
fn check_window(w: &WindowArgs) -> Result<()> {
    rolling_windows((0.0, 0.0), w.window, w.stride())?;
    Ok(())
}

fn windows(series: &TradeSeries, w: &WindowArgs) -> Result<Vec<WindowSpec>> {
    let span = series.time_span().ok_or(tickmoments::Error::EmptyInput)?;
    Ok(rolling_windows(span, w.window, w.stride())?)
}

fn emit(table: &Table, out: &OutputArgs) -> Result<()> {
    match &out.output {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Usage(format!("cannot create {}: {e}", path.display())))?;
            let mut w = std::io::BufWriter::new(file);
            table.write(&mut w, out.format)?;
            w.flush()?;
        }
        None => {
            let mut w = std::io::stdout().lock();
            table.write(&mut w, out.format)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn blanks(n: usize) -> impl Iterator<Item = Cell> {
    std::iter::repeat_n(Cell::Empty, n)
}

pub fn moments(args: &MomentsArgs) -> Result<Status> {
    if args.degrees.is_empty() {
        return Err(Usage("--degrees needs at least one degree".into()).into());
    }
    if let Some(&bad) = args.degrees.iter().find(|&&d| d == 0 || d > args.cap.degree_cap) {
        return Err(Usage(format!("degree {bad} outside 1..={} (raise --degree-cap, at most 16)", args.cap.degree_cap)).into());
    }
    check_window(&args.window)?;
    let series = load(&args.input)?;
    let rows = rolling_moments(&series, args.window.window, args.window.stride(), &args.degrees)?;

    let mut columns = vec!["t".to_string(), "N".to_string()];
    for d in &args.degrees {
        columns.extend([format!("C_{d}"), format!("V_{d}"), format!("p_{d}")]);
    }
    let mut table = Table::new(columns);
    for r in rows {
        let mut row = vec![Cell::Real(r.window.center), Cell::Count(r.trade_count)];
        if r.is_empty() {
            row.extend(blanks(3 * args.degrees.len()));
        } else {
            for e in &r.entries {
                row.extend([e.cost_sum.into(), e.volume_sum.into(), e.moment.into()]);
            }
        }
        table.push(row);
    }
    emit(&table, &args.output)?;
    Ok(OK)
}

pub fn price_vol(args: &PriceVolArgs) -> Result<Status> {
    check_window(&args.window)?;
    let series = load(&args.input)?;
    let specs = windows(&series, &args.window)?;
    let rows = specs
        .par_iter()
        .map(|spec| {
            let view = select_window(&series, *spec);
            let mut row = vec![Cell::Real(spec.center), Cell::Count(view.trades().len())];
            if view.is_empty() {
                row.extend(blanks(7));
            } else {
                let r = price_volatility(&view)?;
                let s = r.stats;
                row.extend([
                    r.sigma_p2_direct.into(),
                    r.sigma_p2_closed.into(),
                    s.sigma_c2.value().into(),
                    s.sigma_v2.value().into(),
                    s.phi_c2.value().into(),
                    s.phi_v2.value().into(),
                    r.negative_flag.into(),
                ]);
            }
            Ok(row)
        })
        .collect::<tickmoments::Result<Vec<_>>>()?;

    let mut table =
        Table::new(["t", "N", "sigma2_direct", "sigma2_closed", "sigmaC2", "sigmaV2", "phiC2", "phiV2", "negative_flag"]);
    rows.into_iter().for_each(|r| table.push(r));
    emit(&table, &args.output)?;
    Ok(OK)
}

pub fn returns_vol(args: &ReturnsVolArgs) -> Result<Status> {
    check_window(&args.window)?;
    let series = load(&args.input)?;
    let returns = build_returns(&series, args.lag)?;
    let specs = windows(&series, &args.window)?;
    let rows = specs
        .par_iter()
        .map(|spec| {
            let records = returns.select_window(spec);
            let mut row = vec![Cell::Real(spec.center), Cell::Count(records.len())];
            if records.is_empty() {
                row.extend(blanks(8));
            } else {
                let r = returns_volatility(records)?;
                row.extend([
                    r.mean_return.into(),
                    r.sigma_q2_direct.into(),
                    r.sigma_q2_rform.into(),
                    r.sigma_q2_closed.into(),
                    r.averages.r11.into(),
                    r.averages.r21.into(),
                    r.averages.r22.into(),
                    r.negative_flag.into(),
                ]);
            }
            Ok(row)
        })
        .collect::<tickmoments::Result<Vec<_>>>()?;

    let mut table = Table::new([
        "t",
        "N_records",
        "mean_return",
        "sigma2_direct",
        "sigma2_rform",
        "sigma2_closed",
        "r11",
        "r21",
        "r22",
        "negative_flag",
    ]);
    rows.into_iter().for_each(|r| table.push(r));
    emit(&table, &args.output)?;
    Ok(OK)
}

/// `start,step,count`.
fn parse_grid(text: &str) -> Result<Grid> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Usage(format!("--grid expects start,step,count; got {text:?}"));
    let [start, step, count] = parts.as_slice() else {
        return Err(bad().into());
    };
    let start: f64 = start.parse().map_err(|_| bad())?;
    let step: f64 = step.parse().map_err(|_| bad())?;
    let count: usize = count.parse().map_err(|_| bad())?;
    Ok(Grid::new(start, step, count)?)
}

/// Test-function file: header `x`, then one value per line.
fn read_testfn(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == "x" => {}
        _ => {
            return Err(tickmoments::Error::Parse { line: 1, message: "test function file must start with header `x`".into() })
                .with_context(|| format!("reading {}", path.display()))
        }
    }
    lines
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|e| tickmoments::Error::Parse { line: i + 1, message: format!("{l:?}: {e}") })
        })
        .collect::<tickmoments::Result<Vec<_>>>()
        .with_context(|| format!("reading {}", path.display()))
}

pub fn charfun(args: &CharfunArgs) -> Result<Status> {
    if args.nmax == 0 || args.nmax > args.cap.degree_cap {
        return Err(Usage(format!("--nmax {} outside 1..={} (raise --degree-cap, at most 16)", args.nmax, args.cap.degree_cap)).into());
    }
    let grid = parse_grid(&args.grid)?;
    WindowSpec::new(0.0, args.window)?;
    let x = read_testfn(&args.testfn)?;
    if x.len() != grid.len {
        return Err(Usage(format!("test function has {} values for {} grid points", x.len(), grid.len)).into());
    }
    let series = load(&args.input)?;
    let pairs = match args.source {
        Source::Prices => PairSeries::from_trades(&series),
        Source::Returns => PairSeries::from_returns(&build_returns(&series, args.lag)?),
    };
    for (g, t) in grid.points().enumerate() {
        if x[g] != 0.0 && pairs.window(&WindowSpec::new(t, args.window)?).is_empty() {
            return Err(Usage(format!("grid point t={t} has no data within the window")).into());
        }
    }
    let provider = WindowedPairs::new(&pairs, args.window)?;
    let result = charfun_truncated(&provider, &grid, &x, args.nmax)?;

    let mut table = Table::new(["order", "term_re", "term_im", "partial_re", "partial_im"]);
    table.push(vec![Cell::Count(0), 1.0.into(), 0.0.into(), 1.0.into(), 0.0.into()]);
    for (k, (term, partial)) in result.order_terms.iter().zip(result.partial_sums()).enumerate() {
        table.push(vec![Cell::Count(k + 1), term.re.into(), term.im.into(), partial.re.into(), partial.im.into()]);
    }
    emit(&table, &args.output)?;
    eprintln!("F = {} + {}i", crate::table::format_real(result.value.re), crate::table::format_real(result.value.im));
    Ok(OK)
}

pub fn simulate(args: &SimulateArgs) -> Result<Status> {
    let cfg = args.sim.config();
    let rows = simulate_rows(&cfg)?;
    let schema: IngestSchema = args.schema.ingest_schema();
    let raw = rows.iter().map(|r| match schema.variant {
        SchemaVariant::TsCostVolume => (r.timestamp, r.price * r.volume, r.volume),
        SchemaVariant::TsPriceVolume => (r.timestamp, r.price, r.volume),
    });
    match &args.output {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Usage(format!("cannot create {}: {e}", path.display())))?;
            write_rows(std::io::BufWriter::new(file), args.format.into(), schema, raw)?;
        }
        None => write_rows(std::io::stdout().lock(), args.format.into(), schema, raw)?,
    }
    eprintln!("seed: {}", cfg.seed);
    Ok(OK)
}

fn identity_row(name: &str, stat: Option<IdentityStat>) -> Vec<Cell> {
    match stat {
        Some(s) => vec![
            Cell::Text(name.into()),
            Cell::Count(s.windows),
            s.max_deviation.into(),
            IDENTITY_TOLERANCE.into(),
            Cell::Text(if s.passed() { "PASS" } else { "FAIL" }.into()),
        ],
        // No records at this lag: nothing to violate.
        None => vec![Cell::Text(name.into()), Cell::Count(0), Cell::Empty, IDENTITY_TOLERANCE.into(), Cell::Text("PASS".into())],
    }
}

pub fn identity_check(args: &IdentityArgs) -> Result<Status> {
    let window = WindowArgs { window: args.window, stride: args.stride };
    check_window(&window)?;
    if args.lag == 0 {
        return Err(tickmoments::Error::ZeroLag.into());
    }
    let series = match &args.input {
        Some(path) => load_trades(path, args.schema.ingest_schema()).with_context(|| format!("reading {}", path.display()))?,
        None => {
            let cfg = args.sim.config();
            eprintln!("checking a simulated series of {} trades (seed {})", cfg.n_trades, cfg.seed);
            simulate_trades(&cfg)?
        }
    };
    let report = check_identities(&series, window.window, window.stride(), args.lag)?;

    let mut table = Table::new(["identity", "windows", "max_deviation", "tolerance", "result"]);
    table.push(identity_row("price_direct_vs_closed", Some(report.price)));
    table.push(identity_row("returns_three_way", report.returns));
    emit(&table, &args.output)?;
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    eprintln!("identity check: {verdict}");
    Ok(if report.passed() { OK } else { IDENTITY_FAILED })
}
