// `!(x > y)` is used on purpose in validation: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod failure;
mod output;
mod run;

use config::Resolved;
use failure::Failure;
use output::Outputs;

/// Environment variable holding the worker-thread count.
const THREADS_ENV: &str = "TWOBATH_THREADS";

#[derive(Parser)]
#[command(
    name = "twobath",
    version,
    about = "Driven two-bath transmon: simulation, fitting and noise spectrometry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Model-side scenarios: spectrum, reflection, power-loss, budget, autler, qp.
    Simulate(Common),
    /// Fit a measured spectrum, reflection trace or power-loss curve.
    Fit(Common),
    /// Welch PSD of a recorded (or surrogate) time series.
    Welch(Common),
    /// Full parameter extraction from the three measurements.
    Table1(Common),
    /// Noise-spectrometer frequency sweep.
    Spectrometer(Common),
    /// Check a config without running it.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to TWOBATH_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Failure::Config(format!("{THREADS_ENV}=`{v}` is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Simulate(c) => ("simulate", c),
        Command::Fit(c) => ("fit", c),
        Command::Welch(c) => ("welch", c),
        Command::Table1(c) => ("table1", c),
        Command::Spectrometer(c) => ("spectrometer", c),
        Command::Validate(c) => ("validate", c),
    };
    match dispatch(name, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twobath {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(name: &str, c: &Common) -> Result<(), Failure> {
    if let Some(n) = threads(c.threads)? {
        if n == 0 {
            return Err(Failure::Config("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    let text = std::fs::read_to_string(&c.config)
        .map_err(|e| Failure::Io(format!("{}: {e}", c.config.display())))?;
    let resolved = Resolved::from_json(&text, c.seed)?;
    if !run::accepts(name, resolved.scenario) {
        return Err(Failure::Config(format!(
            "scenario `{}` is not handled by `{name}`",
            resolved.scenario.name()
        )));
    }
    let notes = run::check(&resolved)?;
    if name == "validate" {
        println!("ok: scenario `{}`", resolved.scenario.name());
        for n in &notes {
            println!("  {n}");
        }
        return Ok(());
    }
    for n in &notes {
        eprintln!("{n}");
    }
    let mut out = Outputs::new(&c.out, resolved.to_value())?;
    run::execute(&resolved, &mut out)?;
    for p in out.written() {
        println!("{}", p.display());
    }
    Ok(())
}
