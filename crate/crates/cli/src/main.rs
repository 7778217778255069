//! `sfar`: simulate, inspect, estimate and fit seasonal fractional
//! autoregressions from the command line.
//!
//! Exit codes: 0 success, 2 usage or validation error, 1 runtime failure.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "sfar", version, about = "Seasonal fractional autoregression toolkit")]
#[command(args_override_self = true)]
struct Cli {
    /// File of `key = value` lines using the flag names; flags given on the
    /// command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads (falls back to SFAR_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a path and write `index,season,value`.
    Simulate(SimulateArgs),
    /// Tabulate a spectral density on a symmetric grid.
    Spectrum(SpectrumArgs),
    /// Initial and one-step estimates from a simulated path.
    Estimate(EstimateArgs),
    /// Monte Carlo study of both estimators.
    Mc(McArgs),
    /// Fit SFAR and SAR models to monthly data.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long = "T")]
    period: usize,
    /// Comma-separated φ(1),…,φ(T).
    #[arg(long, allow_hyphen_values = true)]
    phi: String,
    #[arg(long)]
    hurst: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    cycles: usize,
    #[arg(long, default_value_t = sfar::model::DEFAULT_BURNIN)]
    burnin: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Points on (0, π]; the output mirrors them to negative frequencies.
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// `eps`, `subseq:<u>`, `Y`, or `Y2` (closed form for T = 2).
    #[arg(long, default_value = "Y")]
    which: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Expected period; inferred from the file when omitted.
    #[arg(long = "T")]
    period: Option<usize>,
    #[arg(long, default_value_t = sfar::estimators::DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value = "on", value_parser = ["on", "off"])]
    onestep: String,
}

#[derive(Debug, Args)]
struct McArgs {
    /// Comma-separated φ(1),…,φ(T),H.
    #[arg(long, allow_hyphen_values = true)]
    theta: String,
    #[arg(long = "T")]
    period: usize,
    #[arg(long)]
    n: usize,
    #[arg(long = "M")]
    replicates: usize,
    #[arg(long, default_value_t = sfar::estimators::DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = sfar::model::DEFAULT_BURNIN)]
    burnin: usize,
    #[arg(long)]
    out_report: Option<PathBuf>,
    #[arg(long)]
    out_errors: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Monthly `year,period,value` file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Inclusive year range `YYYY-YYYY`; the whole file when omitted.
    #[arg(long)]
    window: Option<String>,
    #[arg(long = "T", default_value_t = 4)]
    period: usize,
    #[arg(long, default_value_t = sfar::estimators::DEFAULT_DELTA)]
    delta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] sfar::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_validation() => 2,
            _ => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Position of the subcommand name in the raw arguments.
fn subcommand_position(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" || a == "--threads" {
            i += 2;
        } else if a.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    path
}

fn parse_config(text: &str, source: &str) -> Result<Vec<OsString>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{source}, line {}: expected `key = value`", n + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            return Err(usage(format!("{source}, line {}: invalid key `{key}`", n + 1)));
        }
        out.push(OsString::from(format!("--{key}")));
        out.push(OsString::from(value.trim()));
    }
    Ok(out)
}

/// Insert config-file flags right after the subcommand, ahead of the user's
/// own flags, so the latter override them.
fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let extra = parse_config(&text, &path.display().to_string())?;
    let Some(pos) = subcommand_position(&args) else {
        return Ok(args);
    };
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag {
        return if n == 0 { Err(usage("--threads must be at least 1")) } else { Ok(Some(n)) };
    }
    match std::env::var("SFAR_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!("SFAR_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(cli.threads)? {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    pool.install(|| match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Mc(a) => commands::mc(a),
        Command::Fit(a) => commands::fit(a),
    })
}

fn main() -> ExitCode {
    let args = match expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
