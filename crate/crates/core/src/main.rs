//! Command-line interface.
//!
//! Exit codes: 0 success, 1 validation/parse error, 2 calibration
//! failure, 3 invariant-suite failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use contextlab::harness::{self, load_spec};
use contextlab::{calibrate_phase, Error};

#[derive(Parser)]
#[command(
    name = "contextlab",
    version,
    about = "Quantum vs. hidden-variable subensemble statistics for a spin-path interferometric test"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep from a config file and write result files.
    Sweep {
        /// Path to the `key = value` sweep config.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for results and curve files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the seed from the config file / environment.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; affects wall-clock time only, never the output.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Run the built-in invariant suite and print one line per check.
    Verify,
    /// Print the calibration phase for a probe splitter angle.
    Calibrate {
        /// Probe angle in radians, or with a `deg` suffix.
        #[arg(long)]
        vartheta: String,
    },
}

fn run_sweep_command(
    config: PathBuf,
    out: PathBuf,
    seed: Option<u64>,
    workers: usize,
) -> Result<(), Error> {
    let mut spec = load_spec(&config)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let started = Instant::now();
    let (rows, manifest) = harness::run_sweep(&spec, workers)?;
    let elapsed = started.elapsed();
    let written = harness::emit(&rows, &manifest, &out)?;

    println!(
        "calibration phase: {}",
        harness::format_float(manifest.calibration_phase)
    );
    println!("seed: {}", spec.seed);
    println!("{}", harness::summarize(&rows)?);
    for path in &written {
        println!("wrote {}", path.display());
    }
    let mean_row_ms = if manifest.row_timings_ms.is_empty() {
        0.0
    } else {
        manifest.row_timings_ms.iter().sum::<f64>() / manifest.row_timings_ms.len() as f64
    };
    eprintln!(
        "{} rows in {:.2} s ({:.1} ms/row mean, {} workers)",
        manifest.row_count,
        elapsed.as_secs_f64(),
        mean_row_ms,
        workers
    );
    Ok(())
}

fn run_verify_command() -> ExitCode {
    let report = harness::run_all();
    for check in &report.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:<24} {}", check.name, check.detail);
    }
    if let Some(summary) = &report.summary {
        println!("--- summary record ---");
        println!("{summary}");
    }
    if report.all_passed() {
        println!("verify: all {} checks passed", report.checks.len());
        ExitCode::SUCCESS
    } else {
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        eprintln!("verify: {failed} check(s) failed");
        ExitCode::from(3)
    }
}

fn run_calibrate_command(vartheta: &str) -> Result<(), Error> {
    let angle = harness::parse_angle(vartheta).map_err(|msg| Error::Validation {
        field: "vartheta",
        msg,
    })?;
    let phase = calibrate_phase(angle)?;
    println!("{}", harness::format_float(phase));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sweep {
            config,
            out,
            seed,
            workers,
        } => run_sweep_command(config, out, seed, workers),
        Command::Verify => return run_verify_command(),
        Command::Calibrate { vartheta } => run_calibrate_command(&vartheta),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
