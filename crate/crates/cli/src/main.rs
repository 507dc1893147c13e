use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use mempix_core::event::parse_log;
use mempix_core::harness::{self, LogStats, ScenarioError};
use mempix_core::{Engine, OutcomeKind};

mod inspect;

/// Run memory-engine scenarios and examine their snapshots and event logs.
#[derive(Parser)]
#[command(name = "mempix", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario to completion.
    Run {
        #[arg(long, value_name = "FILE")]
        scenario: PathBuf,
        /// Write the event log here.
        #[arg(long, value_name = "FILE")]
        log: Option<PathBuf>,
        /// Write the final snapshot here.
        #[arg(long, value_name = "FILE")]
        snapshot_out: Option<PathBuf>,
        /// Override run_ticks; scheduled emissions past the end are dropped.
        #[arg(long, value_name = "N")]
        ticks: Option<u64>,
    },
    /// Print a readable dump of a snapshot.
    Inspect {
        #[arg(long, value_name = "FILE")]
        snapshot: PathBuf,
    },
    /// Summarize an event log.
    Stats {
        #[arg(long, value_name = "FILE")]
        log: PathBuf,
    },
}

/// Exit code 1 for bad input, 2 for I/O failures.
enum Failure {
    Invalid(String),
    Io(String),
}

impl Failure {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Io(format!("{}: {e}", path.display()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::Run { scenario, log, snapshot_out, ticks } => {
            run(&scenario, log.as_deref(), snapshot_out.as_deref(), ticks)
        }
        Command::Inspect { snapshot } => inspect(&snapshot),
        Command::Stats { log } => stats(&log),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(path: &Path, log: Option<&Path>, snapshot_out: Option<&Path>, ticks: Option<u64>) -> Result<(), Failure> {
    let mut spec = harness::load_scenario(path).map_err(|e| match e {
        ScenarioError::Io(io) => Failure::io(path, io),
        other => Failure::Invalid(format!("{}: {other}", path.display())),
    })?;
    if let Some(n) = ticks {
        if n == 0 {
            return Err(Failure::Invalid("--ticks must be positive".into()));
        }
        spec = spec.with_run_ticks(n);
    }
    let out = harness::run(&spec).map_err(|e| Failure::Invalid(e.to_string()))?;

    if let Some(p) = log {
        fs::write(p, &out.log).map_err(|e| Failure::io(p, e))?;
    }
    if let Some(p) = snapshot_out {
        fs::write(p, &out.snapshot).map_err(|e| Failure::io(p, e))?;
    }

    let mut committed = 0;
    let mut outcomes = [0usize; 3];
    for e in &out.events {
        match &e.kind {
            mempix_core::EventKind::ScreenCommitted { .. } => committed += 1,
            mempix_core::EventKind::Decision { outcome, .. } => {
                outcomes[match outcome {
                    OutcomeKind::Action => 0,
                    OutcomeKind::Associated => 1,
                    OutcomeKind::NoAction => 2,
                }] += 1
            }
            _ => {}
        }
    }
    println!("ran {} ticks", spec.run_ticks);
    println!("screens committed: {committed}");
    println!("decisions: {} action, {} associated, {} no action", outcomes[0], outcomes[1], outcomes[2]);
    println!("commands issued: {}", out.transcript.len());
    for (id, act) in &out.actuators {
        if !act.received.is_empty() {
            println!("  {id}: {} commands", act.received.len());
        }
    }
    Ok(())
}

fn inspect(path: &Path) -> Result<(), Failure> {
    let blob = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let engine = Engine::restore(&blob).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    print!("{}", inspect::render(&engine));
    Ok(())
}

fn stats(path: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let records = parse_log(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    print!("{}", LogStats::from_records(&records));
    Ok(())
}
