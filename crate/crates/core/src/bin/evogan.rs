use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use evogan::cli::{exit_code, run, Experiment, RunConfig};

#[derive(Parser)]
#[command(version, about = "Unified-loss classifiers and evolving GAN experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one classifier per (setting, seed)
    Classify(RunArgs),
    /// Accuracy of each setting across universum mixing ratios
    #[command(name = "fig2_sweep", alias = "fig2-sweep")]
    Fig2Sweep(RunArgs),
    /// U-GAN and evolving GAN training
    Gan(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Replace the config's seed list with this single seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (expected, args) = match cli.command {
        Command::Classify(a) => (Experiment::Classify, a),
        Command::Fig2Sweep(a) => (Experiment::Fig2Sweep, a),
        Command::Gan(a) => (Experiment::Gan, a),
    };
    let result = RunConfig::load(&args.config)
        .and_then(|c| c.with_overrides(args.seed, args.out))
        .and_then(|c| {
            if c.experiment != expected {
                return Err(evogan::Error::Config(format!(
                    "config is for {}, not {}",
                    c.experiment.name(),
                    expected.name()
                )));
            }
            run(&c)
        });
    match result {
        Ok(out) => {
            for f in &out.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
