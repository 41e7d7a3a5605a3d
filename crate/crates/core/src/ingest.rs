//! Trade files: CSV and NDJSON.
//!
//! CSV files carry the exact header `ts,cost,volume` or `ts,price,volume` and
//! one trade per line. NDJSON files hold one object per line with the same
//! field names. Timestamps are decimal seconds or integer nanoseconds; the
//! latter are converted to seconds at load, which keeps sub-microsecond
//! precision only for offsets below roughly 10⁹ s.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::trade::{validate_series, RawTrade, TradeSeries};

const NANOS_PER_SECOND: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchemaVariant {
    #[default]
    TsCostVolume,
    /// Cost is derived as `price · volume`.
    TsPriceVolume,
}

impl SchemaVariant {
    pub fn value_column(self) -> &'static str {
        match self {
            SchemaVariant::TsCostVolume => "cost",
            SchemaVariant::TsPriceVolume => "price",
        }
    }

    pub fn header(self) -> [&'static str; 3] {
        ["ts", self.value_column(), "volume"]
    }
}

impl FromStr for SchemaVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ts_cost_volume" => Ok(Self::TsCostVolume),
            "ts_price_volume" => Ok(Self::TsPriceVolume),
            other => Err(format!("unknown schema {other:?}; expected ts_cost_volume or ts_price_volume")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimestampUnit {
    #[default]
    Seconds,
    Nanos,
}

impl FromStr for TimestampUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "s" | "seconds" => Ok(Self::Seconds),
            "ns" | "nanos" => Ok(Self::Nanos),
            other => Err(format!("unknown timestamp unit {other:?}; expected seconds or nanos")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IngestSchema {
    pub variant: SchemaVariant,
    pub unit: TimestampUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Csv,
    Ndjson,
}

impl FileFormat {
    /// By extension; `None` when the extension says nothing.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Self::Csv),
            "ndjson" | "jsonl" | "json" => Some(Self::Ndjson),
            _ => None,
        }
    }

    fn sniff(bytes: &[u8]) -> Self {
        match bytes.iter().find(|b| !b.is_ascii_whitespace()) {
            Some(b'{') => Self::Ndjson,
            _ => Self::Csv,
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_timestamp(field: &str, unit: TimestampUnit, line: usize) -> Result<f64> {
    match unit {
        TimestampUnit::Seconds => field
            .parse::<f64>()
            .map_err(|_| parse_err(line, format!("timestamp {field:?} is not a number"))),
        TimestampUnit::Nanos => field
            .parse::<i64>()
            .map(|ns| ns as f64 / NANOS_PER_SECOND)
            .map_err(|_| parse_err(line, format!("timestamp {field:?} is not an integer nanosecond count"))),
    }
}

fn parse_number(field: &str, name: &str, line: usize) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("{name} {field:?} is not a number")))
}

fn to_raw(schema: IngestSchema, ts: f64, value: f64, volume: f64) -> RawTrade {
    match schema.variant {
        SchemaVariant::TsCostVolume => (ts, value, volume),
        SchemaVariant::TsPriceVolume => (ts, value * volume, volume),
    }
}

fn finish(rows: Vec<RawTrade>) -> Result<TradeSeries> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    validate_series(rows)
}

fn read_csv<R: Read>(reader: R, schema: IngestSchema) -> Result<TradeSeries> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader);
    let header = csv.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::EmptyInput);
    }
    let expected = schema.variant.header();
    if header.iter().ne(expected.iter().copied()) {
        return Err(parse_err(1, format!("header must be exactly {:?}, found {:?}", expected.join(","), header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let ts = parse_timestamp(&record[0], schema.unit, line)?;
        let value = parse_number(&record[1], expected[1], line)?;
        let volume = parse_number(&record[2], "volume", line)?;
        rows.push(to_raw(schema, ts, value, volume));
    }
    finish(rows)
}

fn json_number(obj: &Map<String, Value>, key: &str, line: usize) -> Result<f64> {
    obj.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| parse_err(line, format!("field {key:?} missing or not a number")))
}

fn read_ndjson<R: BufRead>(reader: R, schema: IngestSchema) -> Result<TradeSeries> {
    let [ts_key, value_key, volume_key] = schema.variant.header();
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let obj = match serde_json::from_str::<Value>(&line) {
            Ok(Value::Object(obj)) => obj,
            Ok(_) => return Err(parse_err(line_no, "expected a JSON object")),
            Err(e) => return Err(parse_err(line_no, e.to_string())),
        };
        if let Some(extra) = obj.keys().find(|k| ![ts_key, value_key, volume_key].contains(&k.as_str())) {
            return Err(parse_err(line_no, format!("unexpected field {extra:?}")));
        }
        let ts = match schema.unit {
            TimestampUnit::Seconds => json_number(&obj, ts_key, line_no)?,
            TimestampUnit::Nanos => obj
                .get(ts_key)
                .and_then(Value::as_i64)
                .map(|ns| ns as f64 / NANOS_PER_SECOND)
                .ok_or_else(|| parse_err(line_no, "field \"ts\" missing or not an integer nanosecond count"))?,
        };
        let value = json_number(&obj, value_key, line_no)?;
        let volume = json_number(&obj, volume_key, line_no)?;
        rows.push(to_raw(schema, ts, value, volume));
    }
    finish(rows)
}

/// Reads and validates trades from any reader.
pub fn read_trades<R: Read>(mut reader: R, format: Option<FileFormat>, schema: IngestSchema) -> Result<TradeSeries> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| parse_err(0, format!("input is not UTF-8: {e}")))?;
    match format.unwrap_or_else(|| FileFormat::sniff(&bytes)) {
        FileFormat::Csv => read_csv(text.as_bytes(), schema),
        FileFormat::Ndjson => read_ndjson(text.as_bytes(), schema),
    }
}

/// Loads a trade file; the format follows the extension, or the content when
/// the extension is not recognised.
pub fn load_trades(path: &Path, schema: IngestSchema) -> Result<TradeSeries> {
    let file = File::open(path)?;
    read_trades(BufReader::new(file), FileFormat::from_path(path), schema)
}

fn format_timestamp(ts: f64, unit: TimestampUnit) -> String {
    match unit {
        TimestampUnit::Seconds => format!("{ts:?}"),
        TimestampUnit::Nanos => format!("{}", (ts * NANOS_PER_SECOND).round() as i64),
    }
}

/// Writes `(timestamp, cost-or-price, volume)` rows in the given schema.
///
/// Numbers use the shortest representation that parses back to the same
/// double.
pub fn write_rows<W, I>(mut out: W, format: FileFormat, schema: IngestSchema, rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = RawTrade>,
{
    let [ts_key, value_key, volume_key] = schema.variant.header();
    if format == FileFormat::Csv {
        writeln!(out, "{ts_key},{value_key},{volume_key}")?;
    }
    for (ts, value, volume) in rows {
        let ts = format_timestamp(ts, schema.unit);
        match format {
            FileFormat::Csv => writeln!(out, "{ts},{value:?},{volume:?}")?,
            FileFormat::Ndjson => {
                writeln!(out, "{{\"{ts_key}\":{ts},\"{value_key}\":{value:?},\"{volume_key}\":{volume:?}}}")?
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// A price that reloads to exactly `cost` under `price · volume`, when one
/// exists within a few ulps of `cost / volume`; otherwise the plain quotient.
/// Every cost that was itself loaded from a price file has such a price.
pub fn price_for_cost(cost: f64, volume: f64) -> f64 {
    const SEARCH_ULPS: usize = 4;
    let quotient = cost / volume;
    let (mut up, mut down) = (quotient, quotient);
    for _ in 0..=SEARCH_ULPS {
        if up * volume == cost {
            return up;
        }
        if down * volume == cost {
            return down;
        }
        up = up.next_up();
        down = down.next_down();
    }
    quotient
}

/// Writes a series. The price schema stores [`price_for_cost`], so series
/// loaded from price files round-trip bit-exactly.
pub fn write_trades<W: Write>(out: W, series: &TradeSeries, format: FileFormat, schema: IngestSchema) -> Result<()> {
    let rows = series.trades().iter().map(|t| match schema.variant {
        SchemaVariant::TsCostVolume => (t.timestamp, t.cost, t.volume),
        SchemaVariant::TsPriceVolume => (t.timestamp, price_for_cost(t.cost, t.volume), t.volume),
    });
    write_rows(out, format, schema, rows)
}
