//! `psmet`: sweeps, bound-chain verification, Monte-Carlo runs and closed forms.

mod closed_form;
mod config;
mod error;
mod output;
mod simulate;
mod sweep;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Command, RunConfig};
use error::CliError;
use output::{emit, json_document, summary_path, Provenance};

#[derive(Parser, Debug)]
#[command(name = "psmet", version, about = "Postselected multi-parameter estimation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override one config field, e.g. `--set fixed.gamma_fluct=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Grid of Fisher matrices and tradeoffs as CSV.
    Sweep(RunArgs),
    /// Bound-chain and closed-form checks as a JSON report.
    Verify(RunArgs),
    /// Replicated maximum-likelihood runs against the Cramér-Rao bound.
    Simulate(RunArgs),
    /// Closed-form values at each point as JSON.
    ClosedForm(RunArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("PSMET_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("PSMET_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (command, args) = match cli.command {
        Sub::Sweep(a) => (Command::Sweep, a),
        Sub::Verify(a) => (Command::Verify, a),
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::ClosedForm(a) => (Command::ClosedForm, a),
    };
    let config = RunConfig::from_path(&args.config, &args.overrides)?.resolve(command)?;
    let provenance = Provenance::of(&config);
    let out = args.out.as_deref();

    match command {
        Command::Sweep => emit(out, &sweep::run(&config)?),
        Command::ClosedForm => emit(out, &json_document(&provenance, "closed-form", &closed_form::run(&config)?)),
        Command::Verify => {
            let report = verify::run(&config)?;
            emit(out, &json_document(&provenance, "verify", &report))?;
            if report.pass {
                Ok(())
            } else {
                let failed: Vec<&str> = report.worst_links.iter().filter(|w| !w.pass).map(|w| w.link).collect();
                Err(CliError::Verification(format!("chain link(s) {} failed", failed.join(", "))))
            }
        }
        Command::Simulate => {
            let sim = simulate::run(&config)?;
            let summary = json_document(&provenance, "simulate", &sim.summary);
            emit(out, &sim.csv)?;
            match out {
                Some(p) => emit(Some(&summary_path(p)), &summary)?,
                None => eprint!("{summary}"),
            }
            if sim.summary.pass {
                Ok(())
            } else {
                Err(CliError::Verification(match sim.summary.max_relative_diag_gap {
                    Some(g) => format!(
                        "scaled covariance is {:.1}% from the {} bound (tolerance {:.1}%)",
                        100.0 * g,
                        sim.summary.target,
                        100.0 * sim.summary.tolerance
                    ),
                    None => format!(
                        "no covariance comparison against the {} bound could be formed: {}",
                        sim.summary.target,
                        sim.summary.target_comparison().unavailable_reason().unwrap_or("unknown")
                    ),
                }))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("psmet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
