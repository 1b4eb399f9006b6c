//! `volterra`: config-driven certification, resolvent construction,
//! positivity checks and stochastic simulation.
//!
//! Exit codes: 0 all enabled checks passed, 1 a mathematical check failed,
//! 2 usage or configuration error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use volterra_core::config::ExperimentConfig;
use volterra_core::CoreError;

#[derive(Parser)]
#[command(name = "volterra", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for reports and tables (default: the config's
    /// `out_dir`, falling back to `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Run even when the admissibility certificate fails.
    #[arg(long, global = true)]
    force: bool,

    /// Size of the worker thread pool (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the kernel's sector conditions and write the certificate.
    VerifyKernel,
    /// Build the operator resolvent by both routes and report residuals.
    Resolvent,
    /// Simulate driven paths and run the enabled pathwise checks.
    Simulate,
    /// Run the Gram and Fourier positivity checks.
    CheckPositivity,
    /// Aggregate previously written reports from the output directory.
    Report,
}

/// Failed mathematical check.
const EXIT_CHECK_FAILED: u8 = 1;
/// Usage or configuration problem.
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: failed to size the thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }

    let config = match &cli.command {
        Command::Report => None,
        _ => {
            let Some(path) = cli.config.as_ref() else {
                eprintln!("error: --config is required for this subcommand");
                return ExitCode::from(EXIT_USAGE);
            };
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", path.display());
                    return ExitCode::from(EXIT_USAGE);
                }
            };
            let mut cfg = match ExperimentConfig::from_json(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: invalid config: {e}");
                    return ExitCode::from(EXIT_USAGE);
                }
            };
            if let Some(seed) = cli.seed {
                cfg.seed = Some(seed);
            }
            Some(cfg)
        }
    };

    // --out beats the config's out_dir beats "out".
    let out = cli
        .out
        .clone()
        .or_else(|| {
            config
                .as_ref()
                .and_then(|c| c.out_dir.as_ref().map(PathBuf::from))
        })
        .unwrap_or_else(|| PathBuf::from("out"));
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("error: cannot create output directory: {e}");
        return ExitCode::from(EXIT_USAGE);
    }

    let result = match cli.command {
        Command::VerifyKernel => commands::verify_kernel(config.as_ref().unwrap(), &out),
        Command::Resolvent => commands::resolvent(config.as_ref().unwrap(), &out, cli.force),
        Command::Simulate => commands::simulate(config.as_ref().unwrap(), &out, cli.force),
        Command::CheckPositivity => {
            commands::check_positivity(config.as_ref().unwrap(), &out, cli.force)
        }
        Command::Report => commands::report(&out),
    };

    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify(&e))
        }
    }
}

/// Configuration and plumbing problems exit 2; anything that means "the
/// mathematics said no" exits 1.
fn classify(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<CoreError>() {
        Some(CoreError::InvalidArgument(_))
        | Some(CoreError::DimensionMismatch { .. })
        | Some(CoreError::GridMismatch(_))
        | Some(CoreError::SizeCapExceeded { .. })
        | Some(CoreError::Io(_))
        | Some(CoreError::Json(_)) => EXIT_USAGE,
        Some(_) => EXIT_CHECK_FAILED,
        None => EXIT_USAGE,
    }
}
