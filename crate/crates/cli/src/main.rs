//! `leibenson` — batch experiment driver for the radial reaction-diffusion
//! laboratory.
//!
//! Subcommands run the canned campaigns (solve, decay-fit, fujita-scan,
//! ladder, verify-inequality) from a TOML config into an output directory.
//! Exit code 0 means every declared assertion passed, 1 an assertion
//! failed, 2 a configuration problem.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod campaigns;
mod config;
mod manifest;

use config::{Campaign, ExperimentConfig};
use manifest::Workspace;

#[derive(Parser)]
#[command(name = "leibenson", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV series, reports, and the manifest.
    #[arg(long)]
    out: PathBuf,
    /// Single-key config patches, e.g. `--override evolution.q=2.4`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one evolution and record its trajectory.
    Solve(RunArgs),
    /// Fit decay exponents and check norm monotonicity on a run.
    DecayFit(RunArgs),
    /// Scan the blow-up/global dichotomy over q and datum amplitude.
    FujitaScan(RunArgs),
    /// Drive the (k, R, h) approximation ladder.
    Ladder(RunArgs),
    /// Estimate Sobolev/Poincare quotient infima over a trial family.
    VerifyInequality(RunArgs),
}

impl Command {
    fn campaign(&self) -> Campaign {
        match self {
            Command::Solve(_) => Campaign::Solve,
            Command::DecayFit(_) => Campaign::DecayFit,
            Command::FujitaScan(_) => Campaign::FujitaScan,
            Command::Ladder(_) => Campaign::Ladder,
            Command::VerifyInequality(_) => Campaign::VerifyInequality,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Solve(a)
            | Command::DecayFit(a)
            | Command::FujitaScan(a)
            | Command::Ladder(a)
            | Command::VerifyInequality(a) => a,
        }
    }
}

const EXIT_ASSERTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let campaign = cli.command.campaign();
    let args = cli.command.args();

    let config = match ExperimentConfig::load(&args.config, &args.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if config.campaign != campaign {
        eprintln!(
            "configuration error: config declares campaign `{}` but the `{campaign}` subcommand was invoked",
            config.campaign
        );
        return ExitCode::from(EXIT_CONFIG);
    }
    let problems = config.validation_errors();
    if !problems.is_empty() {
        eprintln!("configuration errors:");
        for p in &problems {
            eprintln!("  - {p}");
        }
        return ExitCode::from(EXIT_CONFIG);
    }

    let mut ws = match Workspace::create(&args.out) {
        Ok(ws) => ws,
        Err(e) => {
            eprintln!("configuration error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let mut run_all = || -> anyhow::Result<Vec<manifest::Assertion>> {
        campaigns::run(&config, &mut ws)
    };
    let result = if config.workers > 0 {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
        {
            Ok(pool) => pool.install(&mut run_all),
            Err(e) => {
                eprintln!("configuration error: cannot build worker pool: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    } else {
        run_all()
    };

    let assertions = match result {
        Ok(a) => a,
        Err(e) => {
            eprintln!("configuration error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    for a in &assertions {
        println!(
            "[{}] {}: {}",
            if a.passed { "PASS" } else { "FAIL" },
            a.name,
            a.detail
        );
    }
    match ws.finalize(&campaign.to_string(), config.seed, &assertions) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_ASSERTION),
        Err(e) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
