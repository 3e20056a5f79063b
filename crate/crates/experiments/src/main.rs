use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use willshaw_experiments::commands;
use willshaw_experiments::error::Result;
use willshaw_experiments::{Context, Encoded, ExperimentConfig};

#[derive(Parser)]
#[command(name = "willshaw", version, about = "Willshaw associative memory experiments on MNIST")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config file (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Artifact and output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config's global seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Learn the dictionary, store all training desCodes, snapshot checkpoints.
    Train(Common),
    /// Noiseless retrieval statistics and reconstruction error.
    Retrieve(Common),
    /// Completion of visual codes with deleted bits.
    Complete(Common),
    /// Description recovery tasks on stored and unseen patterns.
    Classify(Common),
    /// Blobs, acceptance interval and iterative generation.
    Generate(Common),
    /// Code statistics and memory fill.
    Stats(Common),
}

fn context(c: &Common) -> Result<Context> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    Context::new(cfg, &c.out)
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Train(c) => {
            let report = commands::train(&context(c)?)?;
            eprintln!(
                "stored {} patterns; snapshots at {:?}",
                report.stored, report.checkpoints
            );
        }
        Command::Retrieve(c) | Command::Complete(c) | Command::Classify(c) | Command::Generate(c) | Command::Stats(c) => {
            let ctx = context(c)?;
            let enc = Encoded::new(&ctx, ctx.load_dictionary()?)?;
            match cli.command {
                Command::Retrieve(_) => {
                    commands::retrieve(&ctx, &enc)?;
                }
                Command::Complete(_) => {
                    commands::complete(&ctx, &enc)?;
                }
                Command::Classify(_) => {
                    commands::classify(&ctx, &enc)?;
                }
                Command::Generate(_) => {
                    let r = commands::generate(&ctx, &enc)?;
                    let ok = r.attempts.iter().filter(|a| a.converged()).count();
                    eprintln!(
                        "interval ({}, {}); {ok}/{} attempts converged",
                        r.interval.0,
                        r.interval.1,
                        r.attempts.len()
                    );
                }
                Command::Stats(_) => {
                    commands::stats(&ctx, &enc)?;
                }
                Command::Train(_) => unreachable!(),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
