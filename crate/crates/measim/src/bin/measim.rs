//! Command-line driver for rate computation, protocol simulation and the
//! lemma verification suites.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use measim::cli::{self, cmd_rates, cmd_simulate, cmd_verify, SimulateArgs, VerifyArgs};
use measim::error::Error;

#[derive(Parser)]
#[command(
    name = "measim",
    version,
    about = "Quantum measurement compression toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a single-letter rate region from a problem file.
    Rates(RatesCmd),
    /// Execute a protocol construction at small block length.
    Simulate(SimulateCmd),
    /// Run a randomized lemma verification suite.
    Verify(VerifyCmd),
}

#[derive(Args)]
struct RatesCmd {
    /// Problem file (JSON).
    #[arg(long)]
    input: PathBuf,
    /// One of: mc, mc-instr, nonfeedback, cdcqsi, mcqsi, mcqsi-nonfeedback, uncertainty.
    #[arg(long)]
    theorem: String,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    timing: bool,
}

#[derive(Args)]
struct SimulateCmd {
    #[arg(long)]
    input: PathBuf,
    /// One of: mc, mc-instr, nonfeedback, cdcqsi, mcqsi.
    #[arg(long)]
    protocol: String,
    /// Block length.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Codewords per block; defaults to the rate prescription.
    #[arg(long)]
    l_size: Option<usize>,
    /// Common-randomness blocks; defaults to the rate prescription.
    #[arg(long)]
    m_size: Option<usize>,
    /// Communication rate for cdcqsi (bits per copy).
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    /// Hash rate for mcqsi (bits per copy).
    #[arg(long, default_value_t = 1.0)]
    hash_rate: f64,
    #[arg(long, default_value_t = 0.3)]
    delta: f64,
    #[arg(long, default_value_t = 0.3)]
    eps: f64,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Sweep the block length, e.g. `n=2..8` or `n=2..8x2`; one row per point.
    #[arg(long)]
    series: Option<String>,
    /// Emit the series as CSV on stdout instead of JSON.
    #[arg(long, default_value_t = false)]
    csv: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads for series points (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = false)]
    timing: bool,
}

#[derive(Args)]
struct VerifyCmd {
    /// One of: gentle, gentle-ensemble, trace-ineq, sen, chernoff,
    /// entropy-close, equivalence.
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 1000)]
    instances: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    timing: bool,
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_series(text: &str) -> Result<(usize, usize, usize), Error> {
    // forms: n=START..END or n=START..ENDxSTEP
    let body = text
        .strip_prefix("n=")
        .ok_or_else(|| Error::Parse(format!("series must look like n=2..8, got {text}")))?;
    let (range, step) = match body.split_once('x') {
        Some((r, s)) => (
            r,
            s.parse::<usize>()
                .map_err(|e| Error::Parse(format!("series step: {e}")))?,
        ),
        None => (body, 1),
    };
    let (start, end) = range
        .split_once("..")
        .ok_or_else(|| Error::Parse(format!("series must look like n=2..8, got {text}")))?;
    let start = start
        .parse::<usize>()
        .map_err(|e| Error::Parse(format!("series start: {e}")))?;
    let end = end
        .parse::<usize>()
        .map_err(|e| Error::Parse(format!("series end: {e}")))?;
    if start == 0 || end < start || step == 0 {
        return Err(Error::Parse(format!("bad series bounds {text}")));
    }
    Ok((start, end, step))
}

fn emit(
    report: &cli::RunReport,
    output: Option<&PathBuf>,
    csv_rows: Option<&[serde_json::Value]>,
    csv: bool,
) -> Result<(), Error> {
    let json = report.to_json();
    if let Some(path) = output {
        std::fs::write(path, &json).map_err(|e| Error::Parse(format!("write: {e}")))?;
    }
    match (csv, csv_rows) {
        (true, Some(rows)) => print!("{}", cli::csv_from_reports(rows)),
        _ if output.is_none() => println!("{json}"),
        _ => {}
    }
    Ok(())
}

fn run() -> Result<i32, Error> {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match cli.command {
        Command::Rates(cmd) => {
            let started = std::time::Instant::now();
            let mut report = cmd_rates(&cmd.input, &cmd.theorem, argv)?;
            if cmd.timing {
                report.wall_clock_ms = Some(started.elapsed().as_millis());
            }
            emit(&report, cmd.output.as_ref(), None, false)?;
            Ok(0)
        }
        Command::Simulate(cmd) => {
            let started = std::time::Instant::now();
            let series = cmd.series.as_deref().map(parse_series).transpose()?;
            let args = SimulateArgs {
                protocol: cmd.protocol.clone(),
                n: cmd.n,
                l_size: cmd.l_size,
                m_size: cmd.m_size,
                rate: cmd.rate,
                hash_rate: cmd.hash_rate,
                delta: cmd.delta,
                eps: cmd.eps,
                trials: cmd.trials,
                seed: cmd.seed,
                series,
            };
            let threads = cmd.threads.unwrap_or_else(default_threads);
            let (mut report, rows) = cmd_simulate(&cmd.input, &args, argv, threads)?;
            if cmd.timing {
                report.wall_clock_ms = Some(started.elapsed().as_millis());
            }
            emit(&report, cmd.output.as_ref(), rows.as_deref(), cmd.csv)?;
            Ok(0)
        }
        Command::Verify(cmd) => {
            let started = std::time::Instant::now();
            let args = VerifyArgs {
                suite: cmd.suite.clone(),
                instances: cmd.instances,
                seed: cmd.seed,
                threads: cmd.threads.unwrap_or_else(default_threads),
            };
            let mut report = cmd_verify(&args, argv)?;
            if cmd.timing {
                report.wall_clock_ms = Some(started.elapsed().as_millis());
            }
            let pass = report.all_checks_pass();
            emit(&report, cmd.output.as_ref(), None, false)?;
            Ok(if pass { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code_for(&e) as u8)
        }
    }
}
