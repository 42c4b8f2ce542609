//! `partctl`: exact and analytic partition counts from the command line.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rademacher_core::radseries::{FormulaKind, KMax};
use rademacher_core::tables::TableName;
use rademacher_core::turan::ShiftConvention;
use rademacher_core::Error;
use rug::Rational;

use report::{Format, Status};

#[derive(Parser, Debug)]
#[command(name = "partctl", version, about = "Rademacher-type series for colored and regular partitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sum the analytic series and certify the integer.
    Compute(Opts),
    /// Exact coefficient from the q-series product.
    Oracle(Opts),
    /// Compute and oracle, compared.
    Verify(Opts),
    /// Per-k contributions and running totals.
    Terms(Opts),
    /// Recompute a published table.
    Table {
        #[arg(value_parser = parse_from_str::<TableName>)]
        name: TableName,
        #[command(flatten)]
        opts: Opts,
    },
    /// Hyperbolicity of Jensen polynomials over a range of shifts.
    Turan(Opts),
    /// Ratio of the exact value to the leading asymptotic.
    Asympt(Opts),
    /// Numerical check of the modular transformation.
    Transform(Opts),
    /// Quick end-to-end checks.
    Selftest(Opts),
}

/// Prec: `auto` or a bit count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prec {
    Auto,
    Bits(u32),
}

impl FromStr for Prec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Prec::Auto);
        }
        match s.parse::<u32>() {
            Ok(bits) if bits >= 2 => Ok(Prec::Bits(bits)),
            _ => Err(format!("expected 'auto' or a bit count >= 2, got {s:?}")),
        }
    }
}

fn parse_from_str<T: FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse::<T>().map_err(|e| e.to_string())
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    Rational::from_str(s).map_err(|e| format!("expected a rational like 3/2, got {s:?}: {e}"))
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    #[arg(long, value_parser = parse_from_str::<FormulaKind>)]
    pub kind: Option<FormulaKind>,
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Jensen polynomial degree.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub from: Option<u64>,
    #[arg(long)]
    pub to: Option<u64>,
    /// Working precision floor in bits, or `auto`.
    #[arg(long, default_value = "auto")]
    pub prec: Prec,
    /// Largest modulus k, or `auto` for the stability rule.
    #[arg(long, default_value = "auto", value_parser = parse_from_str::<KMax>)]
    pub kmax: KMax,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// JSON coefficient cache, written through.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub h: Option<i64>,
    #[arg(long)]
    pub k: Option<i64>,
    #[arg(long, value_parser = parse_rational)]
    pub z: Option<Rational>,
    /// Euler product length for `transform`; chosen from the tail bound when omitted.
    #[arg(long)]
    pub terms: Option<usize>,
    /// `direct` scans J^{d,n}, `previous` scans J^{d,n-1}.
    #[arg(long, default_value = "direct", value_parser = parse_convention)]
    pub convention: ShiftConvention,
}

fn parse_convention(s: &str) -> Result<ShiftConvention, String> {
    match s.to_ascii_lowercase().as_str() {
        "direct" => Ok(ShiftConvention::Direct),
        "previous" => Ok(ShiftConvention::Previous),
        _ => Err(format!("expected 'direct' or 'previous', got {s:?}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (opts, result) = match &cli.command {
        Command::Compute(o) => (o, commands::compute(o)),
        Command::Oracle(o) => (o, commands::oracle(o)),
        Command::Verify(o) => (o, commands::verify(o)),
        Command::Terms(o) => (o, commands::terms(o)),
        Command::Table { name, opts } => (opts, commands::table(*name, opts)),
        Command::Turan(o) => (o, commands::turan(o)),
        Command::Asympt(o) => (o, commands::asympt(o)),
        Command::Transform(o) => (o, commands::transform(o)),
        Command::Selftest(o) => (o, commands::selftest(o)),
    };
    let report = match result {
        Ok(report) => report,
        Err(err) => {
            eprintln!("partctl: {err:#}");
            return ExitCode::from(error_status(&err) as u8);
        }
    };
    match report.render(opts.format) {
        Ok(text) => print!("{text}"),
        Err(err) => {
            eprintln!("partctl: {err:#}");
            return ExitCode::from(Status::Failure as u8);
        }
    }
    ExitCode::from(report.status() as u8)
}

fn error_status(err: &anyhow::Error) -> Status {
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidArgument(_)
            | Error::NotCoprime { .. }
            | Error::OutOfRange { .. }
            | Error::TailTooLarge { .. },
        ) => Status::Usage,
        Some(Error::Disagreement { .. }) => Status::Mismatch,
        _ => Status::Failure,
    }
}
