//! `metaqsar`: command-line front end of the selection pipeline.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data or runtime error,
//! 4 partial completion (some cells or methods failed).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use metaqsar_core::pipeline::{run_pipeline, run_stage, RunConfig, RunManifest, Stage, StageOutcome};
use metaqsar_core::Error;

#[derive(Parser)]
#[command(name = "metaqsar", version, about = "Meta-learning strategy selection for QSAR")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the planted synthetic corpus.
    Synth(Common),
    /// Cross-validate every strategy on every target (resumable).
    EvalBase(Common),
    /// aRMSEr scores, per-target ranks and best/top-k labels.
    Rank(Common),
    /// Meta-features, meta-level cross-validation and importance.
    Meta(Common),
    /// Friedman, Nemenyi and Wilcoxon tests over the top strategies.
    Stats(Common),
    /// Every stage in order.
    Run(Common),
    /// Re-hash the outputs recorded in the run manifest.
    Verify {
        /// Output directory holding `manifest.json`.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; omitted means all defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite existing outputs and discard the evaluation checkpoint.
    #[arg(long)]
    force: bool,
    /// Worker thread override.
    #[arg(long)]
    jobs: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        if let Some(jobs) = self.jobs {
            config.jobs = Some(jobs);
        }
        Ok(config)
    }
}

fn exit_for(err: &Error) -> ExitCode {
    if err.is_config_error() {
        ExitCode::from(2)
    } else {
        ExitCode::from(3)
    }
}

fn report(outcomes: &[StageOutcome]) -> ExitCode {
    for o in outcomes {
        println!(
            "{}: {} files in {:.1}s{}",
            o.stage,
            o.outputs.len(),
            o.seconds,
            if o.partial { " (partial)" } else { "" }
        );
    }
    if outcomes.iter().any(|o| o.partial) {
        ExitCode::from(4)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (common, stage) = match &cli.command {
        Command::Synth(c) => (c, Some(Stage::Synth)),
        Command::EvalBase(c) => (c, Some(Stage::EvalBase)),
        Command::Rank(c) => (c, Some(Stage::Rank)),
        Command::Meta(c) => (c, Some(Stage::Meta)),
        Command::Stats(c) => (c, Some(Stage::Stats)),
        Command::Run(c) => (c, None),
        Command::Verify { out } => {
            return match RunManifest::load(out).and_then(|m| m.verify(out)) {
                Ok(bad) if bad.is_empty() => {
                    println!("all recorded outputs match their digests");
                    ExitCode::SUCCESS
                }
                Ok(bad) => {
                    for f in bad {
                        println!("digest mismatch: {f}");
                    }
                    ExitCode::from(3)
                }
                Err(e) => {
                    log::error!("{e}");
                    exit_for(&e)
                }
            };
        }
    };
    let result = common.config().and_then(|config| match stage {
        Some(s) => run_stage(&config, s, common.force).map(|o| vec![o]),
        None => run_pipeline(&config, common.force),
    });
    match result {
        Ok(outcomes) => report(&outcomes),
        Err(e) => {
            log::error!("{e}");
            exit_for(&e)
        }
    }
}
