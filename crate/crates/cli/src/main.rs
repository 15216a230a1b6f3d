use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use halfline_cli::{exit_code, run, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "halfline", about = "Stability experiments for half-line transport schemes")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's "out"; default "out").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Sub {
    /// Check both hypotheses and print the stability verdict.
    Check(Common),
    /// Dump Green's function snapshots.
    Simulate(Common),
    /// Analytic and empirical boundary layers.
    Layers(Common),
    /// Heatmap data of the remainder and its Gaussian bound fit.
    ErrMap(Common),
    /// Norm growth of the probe family u_J with fitted slopes.
    Growth(Common),
    /// Inverse-Laplace reconstruction against time stepping.
    Oracle(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Sub::Check(c) => (Command::Check, c),
        Sub::Simulate(c) => (Command::Simulate, c),
        Sub::Layers(c) => (Command::Layers, c),
        Sub::ErrMap(c) => (Command::ErrMap, c),
        Sub::Growth(c) => (Command::Growth, c),
        Sub::Oracle(c) => (Command::Oracle, c),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("usage error: --threads: {e}");
            return ExitCode::from(1);
        }
    }
    let text = match std::fs::read_to_string(&common.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("usage error: --config {}: {e}", common.config.display());
            return ExitCode::from(1);
        }
    };
    let cfg = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    let out = common.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    match run(cmd, &cfg, &out) {
        Ok(outcome) => {
            if let Some(v) = outcome.report.get("verdict").and_then(|v| v.as_str()) {
                println!("{v}");
            }
            if outcome.exit != 0 {
                eprintln!("{}", serde_json::to_string_pretty(&outcome.report).unwrap());
            } else {
                println!("report written to {}", out.join("report.json").display());
            }
            ExitCode::from(outcome.exit as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
