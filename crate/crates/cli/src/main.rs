//! Command-line interface: training, evaluation, visualization export, and
//! the configuration reference.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "flipgrasp", version, about = "Occluded-grasping stack: push, wall-pivot flip, grasp")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StageArg {
    Low,
    Joint,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlacementArg {
    Close,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlipArg {
    Learned,
    Manual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WhatArg {
    Heightmap,
    Qmaps,
    Masks,
}

#[derive(Subcommand)]
enum Command {
    /// Train the curriculum stages and/or the joint task.
    Train {
        /// Flat key = value configuration file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        stage: StageArg,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for checkpoints, metrics, and the resolved
        /// config snapshot.
        #[arg(long, default_value = "runs/latest")]
        out: PathBuf,
        /// Continue joint training from the checkpoints and metrics in the
        /// output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Evaluate a trained checkpoint greedily.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, short = 'n', default_value_t = 100)]
        episodes: u64,
        #[arg(long, value_enum, default_value = "random")]
        placement: PlacementArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write episode records and metrics here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Which flip controller to evaluate.
        #[arg(long, value_enum, default_value = "learned")]
        flip: FlipArg,
        /// Not supported: evaluation is always greedy.
        #[arg(long, hide = true)]
        epsilon: Option<f64>,
    },
    /// Export height map, Q map, and mask images for one episode step.
    Export {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Replay the scene of this episode record file...
        #[arg(long)]
        record: Option<PathBuf>,
        /// ...at this episode index within the file.
        #[arg(long, default_value_t = 0)]
        episode: u64,
        /// Or generate a fresh scene from a seed.
        #[arg(long, default_value_t = 1)]
        scene_seed: u64,
        #[arg(long, value_enum, default_value = "close")]
        placement: PlacementArg,
        /// 1-based decision step to export.
        #[arg(long, default_value_t = 1)]
        step: usize,
        /// Images to produce; all three when omitted.
        #[arg(long, value_enum)]
        what: Vec<WhatArg>,
        #[arg(long, default_value = "export")]
        out: PathBuf,
    },
    /// Print the configuration key reference as Markdown.
    ConfigReference,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train {
            config,
            stage,
            seed,
            out,
            resume,
        } => commands::train(config.as_deref(), stage, seed, &out, resume),
        Command::Eval {
            checkpoint,
            config,
            episodes,
            placement,
            seed,
            out,
            flip,
            epsilon,
        } => commands::eval(
            &checkpoint,
            config.as_deref(),
            episodes,
            placement,
            seed,
            out.as_deref(),
            flip,
            epsilon,
        ),
        Command::Export {
            checkpoint,
            config,
            record,
            episode,
            scene_seed,
            placement,
            step,
            what,
            out,
        } => commands::export(
            &checkpoint,
            config.as_deref(),
            record.as_deref(),
            episode,
            scene_seed,
            placement,
            step,
            &what,
            &out,
        ),
        Command::ConfigReference => {
            print!("{}", flipgrasp::config::RunConfig::reference());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
