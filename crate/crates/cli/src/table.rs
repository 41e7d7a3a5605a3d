//! Plot-ready tables written as CSV or JSON.
//!
//! Both encodings share one cell formatter: reals carry 17 significant digits
//! (`{:.16e}`), which parses back to the same double.

use std::io::Write;

use crate::args::OutFormat;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Count(usize),
    Flag(bool),
    /// Plain label without commas or quotes.
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Count(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Real(v) => format_real(*v),
            Cell::Count(n) => n.to_string(),
            Cell::Flag(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            // JSON has no literal for non-finite numbers; those go out as strings.
            Cell::Real(v) if !v.is_finite() => format!("\"{}\"", format_real(*v)),
            Cell::Text(s) => format!("\"{s}\""),
            Cell::Empty => "null".into(),
            other => other.csv(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: &mut W, format: OutFormat) -> std::io::Result<()> {
        match format {
            OutFormat::Csv => self.write_csv(out),
            OutFormat::Json => self.write_json(out),
        }
    }

    fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// An array with one object per row; column names are plain identifiers.
    fn write_json<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "[")?;
        for (i, row) in self.rows.iter().enumerate() {
            let fields: Vec<String> = self.columns.iter().zip(row).map(|(k, c)| format!("\"{k}\":{}", c.json())).collect();
            let sep = if i + 1 < self.rows.len() { "," } else { "" };
            writeln!(out, "  {{{}}}{sep}", fields.join(","))?;
        }
        writeln!(out, "]")
    }
}
