//! Command-line front end for history-state numerics.
//!
//! Verbs: `simulate` (build a history state and report its entanglement),
//! `bounds` (constant-Hamiltonian quadratic-entropy bounds over a time
//! sweep), `power` (operator entanglement and entangling power), `measure`
//! (clock measurement protocols), `verify` (the named invariant suite).
//!
//! Exit codes: 0 success, 1 invariant failure, 2 configuration error.

mod commands;
mod config;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use config::RunConfig;
use report::Report;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "histate", version, about = "Discrete system-clock history states: construction, entanglement and clock measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a history state and report spectra, entropies and residuals.
    Simulate(CommonArgs),
    /// Quadratic-entropy bounds, curvature gap and appendix checks over a
    /// final-time sweep (constant Hamiltonians only).
    Bounds(CommonArgs),
    /// Operator entanglement and entangling power of the generating gate.
    Power(CommonArgs),
    /// Clock pair measurements, operator-trace protocol and DQC1 mode.
    Measure(CommonArgs),
    /// Run the named invariant suite; exits nonzero on any failure.
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured rng_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured shot count.
    #[arg(long)]
    shots: Option<u64>,
    /// Override the configured Monte Carlo sample count.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Include wall time in the report metadata (makes output
    /// non-reproducible byte for byte).
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    /// JSON report plus one CSV file per series (requires --out).
    Csv,
}

fn load_config(args: &CommonArgs) -> Result<(RunConfig, String), String> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read {}: {e}", args.config.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| format!("{} is not valid JSON at line {}, column {}: {e}", args.config.display(), e.line(), e.column()))?;
    let mut config: RunConfig = serde_json::from_value(value.clone())
        .map_err(|e| format!("{}: schema violation: {e}", args.config.display()))?;
    config.validate().map_err(|e| format!("{}: {e}", args.config.display()))?;
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    if let Some(shots) = args.shots {
        config.shots = shots;
    }
    if let Some(samples) = args.samples {
        config.mc_samples = samples;
    }
    Ok((config, report::config_hash(&value)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args): (&str, &CommonArgs) = match &cli.command {
        Command::Simulate(a) => ("simulate", a),
        Command::Bounds(a) => ("bounds", a),
        Command::Power(a) => ("power", a),
        Command::Measure(a) => ("measure", a),
        Command::Verify(a) => ("verify", a),
    };

    let (config, hash) = match load_config(args) {
        Ok(ok) => ok,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };

    let started = Instant::now();
    let mut report = Report::new(name, hash);
    let outcome = match &cli.command {
        Command::Simulate(_) => commands::run_simulate(&config, &mut report),
        Command::Bounds(_) => commands::run_bounds(&config, &mut report),
        Command::Power(_) => commands::run_power(&config, &mut report),
        Command::Measure(_) => commands::run_measure(&config, &mut report),
        Command::Verify(_) => commands::run_verify(&config, &mut report),
    };
    if let Err(e) = outcome {
        eprintln!("configuration error: {e}");
        return ExitCode::from(2);
    }
    if args.timing {
        report.wall_time_ms = Some(started.elapsed().as_millis());
    }
    report.filter_outputs(&config.outputs);

    let csv = matches!(args.format, Format::Csv);
    if let Err(e) = report.write(args.out.as_deref(), csv) {
        eprintln!("cannot write report: {e}");
        return ExitCode::from(2);
    }

    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        eprintln!("invariant failure: {}", failed.join(", "));
        ExitCode::from(1)
    }
}
