//! Command-line driver for MC-CDMA allocation experiments.
//!
//! Exit status: 0 on success, 1 on any configuration, validation or I/O
//! failure, 2 when `compare` finds the improved algorithm behind the original
//! one on average at some budget point.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use mccdma::experiment::{
    budget_grid, compare_report, default_config_text, oracle_check, parse_algorithm_set,
    parse_config, parse_scheme_set, run_sweep, write_sweep_csv, ExperimentConfig,
};
use mccdma::oracle::Family;

#[derive(Debug, Parser)]
#[command(version, about = "Group, channel and power allocation experiments for downlink MC-CDMA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Throughput against transmit budget, one CSV row per trial.
    Sweep(RunArgs),
    /// Original vs improved assignment, paired per trial.
    Compare(RunArgs),
    /// Exhaustive optimum next to both greedy algorithms (small instances only).
    OracleCheck {
        #[command(flatten)]
        run: RunArgs,
        /// Let one user own several groups in the oracle search.
        #[arg(long)]
        relaxed: bool,
    },
    /// Print the default configuration document.
    GenConfig {
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Configuration document; defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// mrc, egc, zfc or all.
    #[arg(long)]
    scheme: Option<String>,
    /// original, improved or both.
    #[arg(long)]
    algorithm: Option<String>,
    /// Budget grid in dBW, inclusive.
    #[arg(
        long = "pmax-dbw",
        num_args = 3,
        value_names = ["START", "STOP", "STEP"],
        allow_negative_numbers = true
    )]
    pmax_dbw: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Reuse each trial's channel realization along the whole budget grid.
    #[arg(long)]
    common_random_numbers: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                parse_config(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(s) = &self.scheme {
            cfg.schemes = parse_scheme_set(s)?;
        }
        if let Some(a) = &self.algorithm {
            cfg.algorithms = parse_algorithm_set(a)?;
        }
        if let Some(grid) = &self.pmax_dbw {
            cfg.pmax_dbw = budget_grid(grid[0], grid[1], grid[2])?;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.common_random_numbers |= self.common_random_numbers;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Opens the destination before any work so a bad path fails fast.
fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Human-readable text goes to stdout when the CSV has its own file.
fn report_text(to_file: bool, text: &str) {
    if to_file {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep(args) => {
            let cfg = args.resolve()?;
            let mut out = open_output(args.output.as_deref())?;
            let sweep = run_sweep(&cfg)?;
            write_sweep_csv(&mut out, &sweep)?;
            out.flush()?;
        }
        Command::Compare(args) => {
            let cfg = args.resolve()?;
            let mut out = open_output(args.output.as_deref())?;
            let (report, _) = compare_report(&cfg)?;
            report.write_csv(&mut out)?;
            out.flush()?;
            report_text(args.output.is_some(), &report.render_text());
            if report.regression() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::OracleCheck { run, relaxed } => {
            let mut cfg = run.resolve()?;
            if relaxed {
                cfg.oracle_family = Family::Relaxed;
            }
            let mut out = open_output(run.output.as_deref())?;
            let report = oracle_check(&cfg)?;
            report.write_csv(&mut out)?;
            out.flush()?;
            report_text(run.output.is_some(), &report.render_text());
            if report.violations() > 0 {
                return Ok(ExitCode::from(1));
            }
        }
        Command::GenConfig { output } => {
            let mut out = open_output(output.as_deref())?;
            out.write_all(default_config_text().as_bytes())?;
            out.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
