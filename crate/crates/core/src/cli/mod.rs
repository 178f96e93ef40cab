//! Command-line frontend: `eval`, `oracle-check`, `mc`, `limits` and `sde`.
//!
//! Flags override the optional TOML file given by `--config`, which overrides built-in defaults.
//! Exit codes: 0 ok, 1 check failed, 2 usage, 3 numerical singularity.

mod commands;
mod oracles;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use output::{Format, Meta, Table};

pub use oracles::{OracleKind, OracleReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ginibre-overlaps", version, about = "Conditional eigenvector overlaps of the complex Ginibre ensemble")]
pub struct Cli {
    /// output format (default: json for oracle-check, csv otherwise)
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// TOML file with a table per subcommand; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// write to this file instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// worker threads for mc and sde (results do not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate an overlap function at given points
    Eval(EvalArgs),
    /// Compare closed forms against the independent oracles
    OracleCheck(OracleArgs),
    /// Monte Carlo estimate of D11 or D12 from sampled Ginibre matrices
    Mc(McArgs),
    /// Convergence of finite-N values to the bulk or edge limits
    Limits(LimitsArgs),
    /// Simulate the eigenvalue SDE and test the radial law at the final time
    Sde(SdeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalFn {
    D11,
    D12,
    Rho,
    /// E(O₁₁ | λ) = D11/ρ
    Expectation,
    D11Bulk,
    D12Bulk,
    RhoBulk,
    D11Edge,
    D12Edge,
    D11Asymptotic,
    D12Asymptotic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitFn {
    D11,
    D12,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Bulk,
    Edge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dynamics {
    /// drift 1/2, unit noise: Ginibre law at t = 1
    Ginibre,
    /// drift 2, noise √2 as printed
    AsWritten,
}

#[derive(Args, Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EvalArgs {
    #[arg(long = "fn", value_enum)]
    #[serde(rename = "fn")]
    pub function: Option<EvalFn>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<u64>,
    /// number of points; checked against --points
    #[arg(long)]
    pub k: Option<usize>,
    /// comma-separated complex literals such as `0.5-1i,2`
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
}

#[derive(Args, Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub oracle: Option<OracleKind>,
    /// replaces the shipped tolerance of every selected oracle
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// largest N for the kernel and Lemma 1 oracles (at most 12)
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<u64>,
    /// random cases per oracle
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct McArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    /// second target; switches the estimator to D12
    #[arg(long, allow_hyphen_values = true)]
    pub target2: Option<String>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub matrices: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// exit 1 when |z-score| exceeds this
    #[arg(long)]
    #[serde(rename = "z-max")]
    pub z_max: Option<f64>,
}

#[derive(Args, Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsArgs {
    #[arg(long = "fn", value_enum)]
    #[serde(rename = "fn")]
    pub function: Option<LimitFn>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long = "N-list")]
    #[serde(rename = "N-list")]
    pub n_list: Option<String>,
    #[arg(long, value_enum)]
    pub regime: Option<Regime>,
    /// local coordinates; defaults to k fixed points away from the origin
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// edge angle
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
}

#[derive(Args, Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SdeArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub runs: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dt0: Option<f64>,
    #[arg(long, value_enum)]
    pub dynamics: Option<Dynamics>,
    /// exit 1 when the radial KS distance exceeds this
    #[arg(long)]
    #[serde(rename = "ks-max")]
    pub ks_max: Option<f64>,
}

/// Fills `None` fields of `self` from `other`.
trait Merge {
    fn merged(self, other: Self) -> Self;
}

macro_rules! impl_merge {
    ($t:ident { $($f:ident),* }) => {
        impl Merge for $t {
            fn merged(self, other: Self) -> Self {
                $t { $($f: self.$f.or(other.$f)),* }
            }
        }
    };
}

impl_merge!(EvalArgs { function, n, k, points });
impl_merge!(OracleArgs { oracle, tolerance, n, samples, seed });
impl_merge!(McArgs { n, target, target2, radius, matrices, seed, z_max });
impl_merge!(LimitsArgs { function, k, n_list, regime, points, theta });
impl_merge!(SdeArgs { n, t, runs, seed, dt0, dynamics, ks_max });

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    format: Option<Format>,
    threads: Option<usize>,
    eval: Option<EvalArgs>,
    #[serde(rename = "oracle-check")]
    oracle_check: Option<OracleArgs>,
    mc: Option<McArgs>,
    limits: Option<LimitsArgs>,
    sde: Option<SdeArgs>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(msg) => CliError::Usage(msg),
            other => CliError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Output of a command and, if a check failed, why.
pub struct Outcome {
    pub table: Table,
    pub seed: Option<u64>,
    pub failure: Option<String>,
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `a+bi`-style complex literals separated by commas.
pub fn parse_points(s: &str) -> Result<Vec<Complex64>, CliError> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            Complex64::from_str(p).map_err(|_| usage(format!("cannot parse complex literal {p:?}")))
        })
        .collect()
}

/// First 16 hex digits of the SHA-256 of the resolved configuration.
fn config_hash(command: &str, resolved: &impl Serialize) -> String {
    let text = serde_json::to_string(&(command, resolved)).expect("configs serialize");
    Sha256::digest(text.as_bytes())[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn load_config(path: &Option<PathBuf>) -> Result<ConfigFile, CliError> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("bad config {}: {e}", path.display())))
}

/// Runs the CLI on `args` (including the program name) and returns the exit code. Results go
/// to `out` unless `--output` is given; diagnostics go to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = e.print();
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(None) => EXIT_OK,
        Ok(Some(msg)) => {
            eprintln!("check failed: {msg}");
            EXIT_CHECK_FAILED
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Numerical(e)) => {
            eprintln!("numerical error: {e}");
            EXIT_SINGULAR
        }
        Err(CliError::Io(e)) => {
            eprintln!("i/o error: {e}");
            EXIT_CHECK_FAILED
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<Option<String>, CliError> {
    let file = load_config(&cli.config)?;
    let threads = cli.threads.or(file.threads);
    let format = cli.format.or(file.format);

    let (default_format, hash, job): (Format, String, Box<dyn FnOnce() -> Result<Outcome, CliError> + Send>) =
        match cli.command {
            Command::Eval(a) => {
                let a = commands::eval_defaults(a.merged(file.eval.unwrap_or_default()));
                (Format::Csv, config_hash("eval", &a), Box::new(move || commands::cmd_eval(&a)))
            }
            Command::OracleCheck(a) => {
                let a = commands::oracle_defaults(a.merged(file.oracle_check.unwrap_or_default()));
                (
                    Format::Json,
                    config_hash("oracle-check", &a),
                    Box::new(move || commands::cmd_oracle_check(&a)),
                )
            }
            Command::Mc(a) => {
                let a = commands::mc_defaults(a.merged(file.mc.unwrap_or_default()));
                (Format::Csv, config_hash("mc", &a), Box::new(move || commands::cmd_mc(&a)))
            }
            Command::Limits(a) => {
                let a = commands::limits_defaults(a.merged(file.limits.unwrap_or_default()));
                (Format::Csv, config_hash("limits", &a), Box::new(move || commands::cmd_limits(&a)))
            }
            Command::Sde(a) => {
                let a = commands::sde_defaults(a.merged(file.sde.unwrap_or_default()));
                (Format::Csv, config_hash("sde", &a), Box::new(move || commands::cmd_sde(&a)))
            }
        };
    let outcome = match threads {
        Some(0) => return Err(usage("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| usage(format!("cannot start {t} threads: {e}")))?
            .install(job)?,
        None => job()?,
    };

    let meta = Meta {
        version: env!("CARGO_PKG_VERSION"),
        seed: outcome.seed,
        config_hash: hash,
    };
    let format = format.unwrap_or(default_format);
    if let (Format::Csv, Some(summary)) = (format, &outcome.table.summary) {
        eprintln!("{summary}");
    }
    match &cli.output {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            outcome.table.write(&meta, format, &mut f)?;
            f.flush()?;
        }
        None => outcome.table.write(&meta, format, out)?,
    }
    Ok(outcome.failure)
}
