//! `rrl`: trains inflation-forecasting agents, changes the inflation target
//! on them, and checks the emitted trajectories.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::RunArgs;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "rrl", version, about)]
struct Cli {
    /// Worker threads for running seeds in parallel.
    #[arg(long, global = true, env = "RRL_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train agents under the first inflation target.
    Train(Common),
    /// Resume trained agents and change the inflation target.
    Switch {
        #[command(flatten)]
        common: Common,
        /// A checkpoint directory, or a training output directory with one
        /// checkpoint_seed<S> per seed.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Run the control arm: no exploration and no learning after the
        /// switch.
        #[arg(long)]
        no_exploration: bool,
    },
    /// Train one agent per experience level and switch each of them.
    CompareExperience(Common),
    /// Recompute every check from the CSVs in an output directory.
    Verify {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// TOML experiment config; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated seeds overriding the config.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Bootstrap from the live networks instead of target networks.
    #[arg(long)]
    no_target_networks: bool,
}

impl From<Common> for RunArgs {
    fn from(c: Common) -> Self {
        RunArgs {
            config: c.config,
            out: c.out,
            seeds: c.seeds,
            no_target_networks: c.no_target_networks,
        }
    }
}

fn print_summary(summary: &rrl_core::Summary) {
    for c in &summary.criteria {
        println!("{c}");
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Train(c) => {
            let args: RunArgs = c.into();
            print_summary(&commands::train(&args)?);
            println!("wrote {}", args.out.display());
            Ok(true)
        }
        Command::Switch {
            common,
            checkpoint,
            no_exploration,
        } => {
            let args: RunArgs = common.into();
            print_summary(&commands::switch(&args, &checkpoint, no_exploration)?);
            println!("wrote {}", args.out.display());
            Ok(true)
        }
        Command::CompareExperience(c) => {
            let args: RunArgs = c.into();
            print_summary(&commands::compare_experience(&args)?);
            println!("wrote {}", args.out.display());
            Ok(true)
        }
        Command::Verify { out } => {
            let report = commands::verify(&out)?;
            for line in &report.lines {
                println!("{line}");
            }
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
