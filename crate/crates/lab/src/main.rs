use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sigma_lab::cli::{execute, Command};
use sigma_lab::config::RunConfig;

/// Decay-rate predictions and numerical experiments for structurally damped σ-evolution equations.
#[derive(Parser)]
#[command(name = "sigma-lab", version)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// JSON configuration document.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration value, e.g. `--set model.sigma=3`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Predicted decay exponent for one estimate, optionally over a lattice.
    Predict,
    /// Linear decay series and rate fit.
    LinearDecay,
    /// One semilinear run with classification.
    Semilinear,
    /// Classification over a grid of powers and amplitudes.
    Sweep,
    /// Randomized oracle and invariant checks.
    Selftest,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let cmd = match args.command {
        Cmd::Predict => Command::Predict,
        Cmd::LinearDecay => Command::LinearDecay,
        Cmd::Semilinear => Command::Semilinear,
        Cmd::Sweep => Command::Sweep,
        Cmd::Selftest => Command::Selftest,
    };
    let mut sets = args.sets.clone();
    if let Some(out) = &args.out {
        sets.push(format!("out={}", serde_json::Value::String(out.display().to_string())));
    }
    if let Some(w) = args.workers {
        sets.push(format!("workers={w}"));
    }
    if let Some(s) = args.seed {
        sets.push(format!("seed={s}"));
    }
    let result = RunConfig::load(args.config.as_deref(), &sets).and_then(|cfg| {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global().ok();
        execute(cmd, &cfg)
    });
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}: {e}", cmd.as_str());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
