//! `tickmoments` command-line interface.
//!
//! Exit codes: 0 success, 1 identity check failed, 2 configuration error,
//! 3 input error, 4 unsupported configuration.

mod args;
mod commands;
mod table;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;
use tickmoments::Error;

use args::{Cli, Command};

const CONFIG_ERROR: u8 = 2;
const INPUT_ERROR: u8 = 3;
const UNSUPPORTED: u8 = 4;

/// A configuration problem detected by the CLI itself.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return CONFIG_ERROR;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::UnsupportedWindowOverlap { .. } => UNSUPPORTED,
                Error::DegreeOutOfRange { .. }
                | Error::TruncationOrderOutOfRange { .. }
                | Error::ZeroLag
                | Error::LagTooLarge { .. }
                | Error::InvalidWindow(_)
                | Error::InvalidGrid(_)
                | Error::InvalidSimConfig(_) => CONFIG_ERROR,
                _ => INPUT_ERROR,
            };
        }
    }
    INPUT_ERROR
}

fn explain(err: &anyhow::Error) -> String {
    let overlap = err.chain().any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::UnsupportedWindowOverlap { .. })));
    if overlap {
        format!(
            "{err:#}; only identical times or pairwise disjoint windows are supported, so use a grid step larger than the window width"
        )
    } else {
        format!("{err:#}")
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Moments(a) => commands::moments(a),
        Command::PriceVol(a) => commands::price_vol(a),
        Command::ReturnsVol(a) => commands::returns_vol(a),
        Command::Charfun(a) => commands::charfun(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::IdentityCheck(a) => commands::identity_check(a),
    };
    match outcome {
        Ok(status) => ExitCode::from(status),
        Err(err) => {
            eprintln!("error: {}", explain(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}
