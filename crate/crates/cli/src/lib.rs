//! The `rec-sizer` command line: extract representative days, size the
//! community, evaluate a sizing and draw the report.
//!
//! Exit codes: 0 success, 1 internal failure, 2 invalid input (bad
//! flags, unreadable or malformed files, configuration/solution hash
//! mismatch), 3 insufficient data, 4 infeasible problem, 5 solver limits
//! reached before the gap was proven (the incumbent is still written).

pub mod commands;
pub mod manifest;
pub mod plots;
pub mod svg;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rec_sizer::signal::{LambdaChoice, RegressorSpec};

pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INSUFFICIENT_DATA: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_LIMIT: i32 = 5;

/// Environment variable holding the log filter, e.g. `info` or `rec_sizer=debug`.
pub const LOG_ENV: &str = "REC_SIZER_LOG";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }

    /// Prefixes the message with the flag or file it concerns.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<rec_sizer::Error> for CliError {
    fn from(e: rec_sizer::Error) -> Self {
        use rec_sizer::Error as E;
        let code = match &e {
            E::InsufficientData(_) => EXIT_INSUFFICIENT_DATA,
            E::Infeasible => EXIT_INFEASIBLE,
            E::Numerical(_) | E::State(_) => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rec-sizer",
    version,
    about = "PV and battery sizing for renewable energy communities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduce a year of hourly loads and weather to representative days.
    Extract(ExtractArgs),
    /// Size PV and batteries for every participant.
    Size(SizeArgs),
    /// Cash flows, NPV, payback and bills of a sizing.
    Evaluate(EvaluateArgs),
    /// Plots and tables from an evaluation.
    Report(ReportArgs),
    /// Write a synthetic community (loads, weather, configuration).
    Synth(SynthArgs),
}

/// How `--lambda` picks the LASSO weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaArg(pub LambdaChoice);

impl FromStr for LambdaArg {
    type Err = String;

    /// `auto` (5-fold cross-validation over 20 values), `rel:<f>` (fraction
    /// of the smallest all-zero weight) or a plain nonnegative number.
    fn from_str(s: &str) -> Result<Self, String> {
        let bad =
            || format!("expected 'auto', 'rel:<fraction>' or a nonnegative number, got '{s}'");
        let choice = if s == "auto" {
            LambdaChoice::CrossValidated { folds: 5, grid: 20 }
        } else if let Some(f) = s.strip_prefix("rel:") {
            LambdaChoice::Relative(f.parse().map_err(|_| bad())?)
        } else {
            LambdaChoice::Fixed(s.parse().map_err(|_| bad())?)
        };
        match choice {
            LambdaChoice::Relative(v) | LambdaChoice::Fixed(v) if !(v.is_finite() && v >= 0.0) => {
                Err(bad())
            }
            c => Ok(LambdaArg(c)),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Wide load CSV: `timestamp` then one column per participant.
    #[arg(long)]
    pub input: PathBuf,
    /// Weather CSV with `irradiance_kw_m2` and `ambient_c`.
    #[arg(long)]
    pub weather: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value = "rel:0.1")]
    pub lambda: LambdaArg,
    /// Yearly harmonics.
    #[arg(long, default_value_t = RegressorSpec::default().n_yearly)]
    pub ny: usize,
    /// Weekly harmonics.
    #[arg(long, default_value_t = RegressorSpec::default().n_weekly)]
    pub nw: usize,
    /// Daily harmonics.
    #[arg(long, default_value_t = RegressorSpec::default().n_daily)]
    pub nd: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Bnb,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Bnb => "bnb",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Args)]
pub struct SizeArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub repdays: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Bnb)]
    pub method: Method,
    /// Relative optimality gap at which branch-and-bound stops.
    #[arg(long, default_value_t = 1e-6)]
    pub gap: f64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// SVG plots, each with a CSV twin.
    Svg,
    /// CSV tables only.
    Csv,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub outdir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Svg)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub outdir: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub participants: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// First day of the data, `YYYY-MM-DD`.
    #[arg(long, default_value = "2023-01-01")]
    pub start: chrono::NaiveDate,
    #[arg(long, default_value_t = 8760)]
    pub hours: usize,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Extract(a) => commands::extract(&a),
        Command::Size(a) => commands::size(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Report(a) => commands::report(&a),
        Command::Synth(a) => commands::synth(&a),
    }
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_flag() {
        assert_eq!(
            "auto".parse::<LambdaArg>().unwrap().0,
            LambdaChoice::CrossValidated { folds: 5, grid: 20 }
        );
        assert_eq!(
            "0".parse::<LambdaArg>().unwrap().0,
            LambdaChoice::Fixed(0.0)
        );
        assert_eq!(
            "rel:0.2".parse::<LambdaArg>().unwrap().0,
            LambdaChoice::Relative(0.2)
        );
        for bad in ["-1", "rel:-0.1", "NaN", "inf", "x", "rel:"] {
            assert!(bad.parse::<LambdaArg>().is_err(), "{bad}");
        }
    }

    #[test]
    fn exit_codes() {
        use rec_sizer::Error as E;
        assert_eq!(
            CliError::from(E::InsufficientData("x".into())).code,
            EXIT_INSUFFICIENT_DATA
        );
        assert_eq!(CliError::from(E::Infeasible).code, EXIT_INFEASIBLE);
        assert_eq!(CliError::from(E::Parse("x".into())).code, EXIT_INPUT);
        assert_eq!(CliError::from(E::Numerical("x".into())).code, EXIT_INTERNAL);
    }

    #[test]
    fn arguments_parse() {
        let cli = Cli::try_parse_from([
            "rec-sizer",
            "size",
            "--config",
            "c.toml",
            "--repdays",
            "r.json",
            "--out",
            "s.json",
            "--gap",
            "1e-2",
            "--threads",
            "4",
        ])
        .unwrap();
        match cli.command {
            Command::Size(a) => {
                assert_eq!(a.gap, 1e-2);
                assert_eq!(a.threads, 4);
                assert_eq!(a.method, Method::Bnb);
            }
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from([
            "rec-sizer",
            "extract",
            "--input",
            "l.csv",
            "--output",
            "o.json"
        ])
        .is_err());
    }
}
