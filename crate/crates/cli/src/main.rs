//! `wide`: batch front end of the weighted space-time solver.
//!
//! Subcommands: `solve` and `sweep` run configs and persist results;
//! `gradcheck` exercises the finite-difference suite over the preset
//! registry; `presets` lists the registry; `compare` diffs two run
//! directories; `plotdata` emits plain-text columns for plotting tools.

mod commands;
mod config;
mod csvio;
mod error;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, EXIT_CONFIG};

#[derive(Parser)]
#[command(
    name = "wide",
    version,
    about = "variational space-time solver for hyperbolic equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed recorded in the report (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for cold-started sweep entries; falls back to
    /// WIDE_SOLVER_THREADS, then 1.
    #[arg(long)]
    threads: Option<usize>,
    /// Skip the diagnostic checks (exit code then ignores them).
    #[arg(long)]
    no_checks: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize one instance (single-eps schedule) and write field, traces,
    /// checks and report.
    Solve(RunArgs),
    /// Run the whole eps schedule with warm starts and the oracle
    /// comparison; writes per-eps directories and convergence.csv.
    Sweep(RunArgs),
    /// Finite-difference gradient consistency over the preset registry.
    Gradcheck {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Random fields per preset.
        #[arg(long, default_value_t = 5)]
        fields: usize,
    },
    /// List the preset registry and the equations realized.
    Presets,
    /// Compare two run directories field by field.
    Compare { dir_a: PathBuf, dir_b: PathBuf },
    /// Emit (t, x, w) and (t, E) plain-text columns from a run directory.
    Plotdata {
        run_dir: PathBuf,
        /// Destination directory, defaults to the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve_threads(cli: Option<usize>) -> usize {
    cli.or_else(|| {
        std::env::var("WIDE_SOLVER_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(1)
    .max(1)
}

fn run_command(args: &RunArgs, is_sweep: bool) -> Result<i32, CliError> {
    let config_path = args.config.clone();
    let mut config = config::RunConfig::load(&config_path)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if !is_sweep && config.epsilons.len() != 1 {
        return Err(CliError::new(
            EXIT_CONFIG,
            format!(
                "solve requires a single-eps schedule, got {} entries (use sweep)",
                config.epsilons.len()
            ),
        ));
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| {
            CliError::new(
                EXIT_CONFIG,
                "no output directory: pass --out or set output_dir",
            )
        })?;
    let config_dir = config_path
        .parent()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let resolved = config.resolve(&config_dir)?;
    for w in &resolved.warnings {
        eprintln!("warning: {w}");
    }
    let threads = resolve_threads(args.threads);
    let outcome = runner::run(&resolved, &out_dir, !args.no_checks, threads, is_sweep)?;
    for entry in &outcome.report.entries {
        let status = match &entry.error {
            Some(e) => format!("failed: {e}"),
            None => {
                let stats = entry.stats.as_ref().expect("stats on success");
                format!(
                    "converged in {} iterations, F = {:.6e}, J = {:.6e}",
                    stats.iterations, stats.value, stats.rescaled_value
                )
            }
        };
        println!("eps = {:<10} {status}", entry.eps);
        for check in &entry.checks {
            println!("    [{:^7}] {}", check.status, check.detail);
        }
        if let Some(d) = &entry.oracle_distance {
            println!(
                "    oracle distance {:.6e} (relative {:.4e}) on [0, {:.4}]",
                d.spacetime_l2, d.relative, d.window
            );
        }
    }
    if let Some(slope) = outcome.report.convergence_slope {
        println!("convergence slope vs eps: {slope:.4}");
    }
    println!(
        "report written to {}",
        out_dir.join("report.json").display()
    );
    Ok(runner::exit_code(&outcome))
}

fn main() -> ExitCode {
    // die quietly when the output pipe closes (e.g. `wide presets | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result: Result<i32, CliError> = match &cli.command {
        Command::Solve(args) => run_command(args, false),
        Command::Sweep(args) => run_command(args, true),
        Command::Gradcheck { seed, fields } => commands::gradcheck(*seed, *fields),
        Command::Presets => commands::presets(),
        Command::Compare { dir_a, dir_b } => commands::compare_dirs(dir_a, dir_b),
        Command::Plotdata { run_dir, out } => commands::plotdata(run_dir, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
