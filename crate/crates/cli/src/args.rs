use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tickmoments::ingest::{FileFormat, IngestSchema, SchemaVariant, TimestampUnit};
use tickmoments::sim::SimConfig;
use tickmoments::{DEFAULT_DEGREE_CAP, MAX_DEGREE};

#[derive(Debug, Parser)]
#[command(name = "tickmoments", version, about = "Volume-weighted price and returns moments over trade windows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rolling C(n), V(n) and p(n) = C(n)/V(n) per degree.
    Moments(MomentsArgs),
    /// Rolling price volatility in direct and closed form.
    PriceVol(PriceVolArgs),
    /// Rolling lag-m returns volatility in its three forms.
    ReturnsVol(ReturnsVolArgs),
    /// Truncated characteristic functional on a time grid.
    Charfun(CharfunArgs),
    /// Write a simulated trade series.
    Simulate(SimulateArgs),
    /// Check that the volatility forms agree over rolling windows.
    IdentityCheck(IdentityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Schema {
    TsCostVolume,
    TsPriceVolume,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TsUnit {
    S,
    Ns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TradeFormat {
    Csv,
    Ndjson,
}

impl From<TradeFormat> for FileFormat {
    fn from(f: TradeFormat) -> Self {
        match f {
            TradeFormat::Csv => FileFormat::Csv,
            TradeFormat::Ndjson => FileFormat::Ndjson,
        }
    }
}

/// Output table encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct SchemaArgs {
    /// Column layout of trade files.
    #[arg(long, value_enum, default_value = "ts-cost-volume")]
    pub schema: Schema,
    /// Timestamp unit: decimal seconds or integer nanoseconds.
    #[arg(long, value_enum, default_value = "s")]
    pub ts_unit: TsUnit,
}

impl SchemaArgs {
    pub fn ingest_schema(&self) -> IngestSchema {
        let variant = match self.schema {
            Schema::TsCostVolume => SchemaVariant::TsCostVolume,
            Schema::TsPriceVolume => SchemaVariant::TsPriceVolume,
        };
        let unit = match self.ts_unit {
            TsUnit::S => TimestampUnit::Seconds,
            TsUnit::Ns => TimestampUnit::Nanos,
        };
        IngestSchema { variant, unit }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Trade file (CSV or NDJSON, chosen by extension or content).
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub schema: SchemaArgs,
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    /// Averaging window width Δ.
    #[arg(long)]
    pub window: f64,
    /// Distance between window centers; defaults to the window width.
    #[arg(long)]
    pub stride: Option<f64>,
}

impl WindowArgs {
    pub fn stride(&self) -> f64 {
        self.stride.unwrap_or(self.window)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutFormat,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CapArgs {
    /// Largest accepted degree or truncation order.
    #[arg(long, default_value_t = DEFAULT_DEGREE_CAP, value_parser = clap::value_parser!(u32).range(1..=MAX_DEGREE as i64))]
    pub degree_cap: u32,
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Comma-separated degrees, e.g. `1,2,3`.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub degrees: Vec<u32>,
    #[command(flatten)]
    pub cap: CapArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PriceVolArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReturnsVolArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Lag m: each trade is compared with the m-th previous one.
    #[arg(long, default_value_t = 1)]
    pub lag: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    /// Trade costs and volumes.
    Prices,
    /// Lag-m cost and volume ratios.
    Returns,
}

#[derive(Debug, Clone, Args)]
pub struct CharfunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Averaging window width Δ around each grid point.
    #[arg(long)]
    pub window: f64,
    /// Grid as `start,step,count`.
    #[arg(long)]
    pub grid: String,
    /// Test function values: header `x`, one value per grid point.
    #[arg(long)]
    pub testfn: PathBuf,
    /// Truncation order.
    #[arg(long, default_value_t = 4)]
    pub nmax: u32,
    #[command(flatten)]
    pub cap: CapArgs,
    #[arg(long, value_enum, default_value = "prices")]
    pub source: Source,
    /// Lag for `--source returns`.
    #[arg(long, default_value_t = 1)]
    pub lag: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = SimConfig::default().n_trades)]
    pub n_trades: usize,
    #[arg(long, default_value_t = SimConfig::default().seed)]
    pub seed: u64,
    #[arg(long, default_value_t = SimConfig::default().start_time, allow_negative_numbers = true)]
    pub start_time: f64,
    #[arg(long, default_value_t = SimConfig::default().initial_price)]
    pub initial_price: f64,
    /// Scale of the per-trade log-price step.
    #[arg(long, default_value_t = SimConfig::default().sigma_step)]
    pub sigma_step: f64,
    /// Location of the log-normal volume law.
    #[arg(long, default_value_t = SimConfig::default().volume_mu, allow_negative_numbers = true)]
    pub volume_mu: f64,
    /// Scale of the log-normal volume law.
    #[arg(long, default_value_t = SimConfig::default().volume_sigma)]
    pub volume_sigma: f64,
    /// Expected trades per unit time.
    #[arg(long, default_value_t = SimConfig::default().arrival_rate)]
    pub arrival_rate: f64,
}

impl SimArgs {
    pub fn config(&self) -> SimConfig {
        SimConfig {
            n_trades: self.n_trades,
            seed: self.seed,
            start_time: self.start_time,
            initial_price: self.initial_price,
            sigma_step: self.sigma_step,
            volume_mu: self.volume_mu,
            volume_sigma: self.volume_sigma,
            arrival_rate: self.arrival_rate,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub schema: SchemaArgs,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TradeFormat,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct IdentityArgs {
    /// Trade file; a fresh simulation is checked when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub schema: SchemaArgs,
    #[arg(long, default_value_t = 50.0)]
    pub window: f64,
    #[arg(long)]
    pub stride: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub lag: usize,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
