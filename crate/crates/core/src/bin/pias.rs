use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pias_workbench::error::Error;
use pias_workbench::workbench::{self, resolve_config, with_threads, StageOutcome, Workbench};

#[derive(Parser)]
#[command(name = "pias", version, about = "Per-instance algorithm selection workbench")]
struct Cli {
    /// Experiment config (JSON); full-scale defaults when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory override
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Apply the reduced desk-scale preset
    #[arg(long, global = true)]
    desk_scale: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write the problem suite manifest
    Suite,
    /// Compute landscape features
    Features,
    /// Run the solver portfolio and build performance tables
    Collect,
    /// Train selectors with nested cross-validation
    Train,
    /// Score selections and write reports
    Evaluate,
    /// Run every stage in order
    Pipeline,
}

fn run(cli: &Cli) -> Result<Vec<StageOutcome>, Error> {
    let config = resolve_config(cli.config.as_deref(), cli.desk_scale, cli.seed, cli.out.as_deref())?;
    let bench = Workbench::new(config)?;
    let stage = match cli.command {
        Command::Suite => workbench::Stage::Suite,
        Command::Features => workbench::Stage::Features,
        Command::Collect => workbench::Stage::Collect,
        Command::Train => workbench::Stage::Train,
        Command::Evaluate => workbench::Stage::Evaluate,
        Command::Pipeline => return with_threads(cli.threads, || bench.pipeline())?,
    };
    with_threads(cli.threads, || bench.run_stage(stage).map(|o| vec![o]))?
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcomes) => {
            for o in outcomes {
                println!("{}: {:?}", o.stage.as_str(), o.status);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(2)
        }
    }
}
