//! Command implementations.

use std::path::Path;

use flipgrasp::agents::{fcn_spec, mlp_spec, HighAgent, LowAgent};
use flipgrasp::config::{ConfigError, RunConfig};
use flipgrasp::io;
use flipgrasp::nn::checkpoint::{load_named, save_networks};
use flipgrasp::rng::{rng_for, stream};
use flipgrasp::sim::Placement;
use flipgrasp::training::{
    evaluate, run_episode_observed, train_joint, train_low, FlipController, JointStatus, Metrics,
    Mode, StageId, StageReport, StageStatus,
};
use rand::Rng as _;

use crate::{FlipArg, PlacementArg, StageArg, WhatArg};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn load_config(path: Option<&Path>, seed_override: Option<u64>) -> Result<RunConfig, CliError> {
    let mut cfg = match path {
        Some(p) => RunConfig::parse_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn placement_of(arg: PlacementArg) -> Placement {
    match arg {
        PlacementArg::Close => Placement::CloseToWall,
        PlacementArg::Random => Placement::Random,
    }
}

fn print_stage(report: &StageReport) {
    let tail = report.curve.last().copied().unwrap_or(0.0);
    println!(
        "stage {:?}: {:?} after {} episodes (trailing flip success {:.2})",
        report.stage, report.status, report.episodes_run, tail
    );
}

/// Derived seeds so the curriculum stages and joint loop draw from disjoint
/// scene streams.
fn stage_seed(master: u64, salt: u64) -> u64 {
    rng_for(master, stream::INIT, salt).random()
}

pub fn train(
    config: Option<&Path>,
    stage: StageArg,
    seed: Option<u64>,
    out: &Path,
    resume: bool,
) -> Result<(), CliError> {
    let cfg = load_config(config, seed)?;
    std::fs::create_dir_all(out).map_err(runtime)?;
    std::fs::write(out.join("config_resolved.cfg"), cfg.to_text()).map_err(runtime)?;
    let low_ckpt = out.join("low.ckpt");
    let joint_ckpt = out.join("joint.ckpt");
    let metrics_path = out.join("metrics.jsonl");

    let run_low = matches!(stage, StageArg::Low | StageArg::All);
    let run_joint = matches!(stage, StageArg::Joint | StageArg::All);

    let mut low = if run_low && !(resume && low_ckpt.exists()) {
        LowAgent::new(cfg.low, stage_seed(cfg.seed, 1))
    } else {
        let path = if joint_ckpt.exists() && run_joint && resume {
            &joint_ckpt
        } else {
            &low_ckpt
        };
        if !path.exists() {
            return Err(CliError::Config(format!(
                "{} not found; run --stage low first or drop --resume",
                path.display()
            )));
        }
        let net = load_named(path, "low", &mlp_spec()).map_err(runtime)?;
        LowAgent::with_network(cfg.low, net)
    };

    if run_low && !(resume && low_ckpt.exists()) {
        let flush = train_low(
            &mut low,
            &cfg.env,
            StageId::LowFlush,
            &cfg.flush,
            stage_seed(cfg.seed, 2),
        )
        .map_err(runtime)?;
        print_stage(&flush);
        let jitter = train_low(
            &mut low,
            &cfg.env,
            StageId::LowJitter,
            &cfg.jitter,
            stage_seed(cfg.seed, 3),
        )
        .map_err(runtime)?;
        print_stage(&jitter);
        if jitter.status == StageStatus::GateNotMet {
            println!("note: jitter gate not met within budget; continuing with the current policy");
        }
        save_networks(&low_ckpt, &[("low", &low.net)]).map_err(runtime)?;
        println!("wrote {}", low_ckpt.display());
    }

    if run_joint {
        let mut start_episode = 0;
        let mut high = if resume && joint_ckpt.exists() {
            start_episode = io::read_metrics(&metrics_path)
                .map(|rows| rows.len() as u64)
                .unwrap_or(0);
            let net = load_named(&joint_ckpt, "high", &fcn_spec()).map_err(runtime)?;
            HighAgent::with_network(cfg.high, net)
        } else {
            if metrics_path.exists() {
                std::fs::remove_file(&metrics_path).map_err(runtime)?;
            }
            HighAgent::new(cfg.high, stage_seed(cfg.seed, 4))
        };
        let report = train_joint(
            &mut high,
            &mut low,
            &cfg.env,
            &cfg.joint,
            stage_seed(cfg.seed, 5),
            start_episode,
        );
        io::append_metrics(&metrics_path, &report.metrics).map_err(runtime)?;
        save_networks(&joint_ckpt, &[("high", &high.net), ("low", &low.net)])
            .map_err(runtime)?;
        let last = report
            .metrics
            .last()
            .map(|r| r.completion_trailing)
            .unwrap_or(0.0);
        println!(
            "joint: {:?} after {} episodes (trailing completion {:.2})",
            report.status, report.episodes_run, last
        );
        println!("wrote {} and {}", joint_ckpt.display(), metrics_path.display());
        if report.status == JointStatus::DivergedRolledBack {
            return Err(CliError::Runtime(
                "joint training diverged; checkpoints hold the last good networks".into(),
            ));
        }
    }
    Ok(())
}

fn load_agents(
    checkpoint: &Path,
    cfg: &RunConfig,
) -> Result<(HighAgent, LowAgent), CliError> {
    let high_net = load_named(checkpoint, "high", &fcn_spec()).map_err(runtime)?;
    let low_net = load_named(checkpoint, "low", &mlp_spec()).map_err(runtime)?;
    Ok((
        HighAgent::with_network(cfg.high, high_net),
        LowAgent::with_network(cfg.low, low_net),
    ))
}

fn print_metrics(m: &Metrics) {
    println!("episodes            {}", m.episodes);
    println!("completion rate     {:.3}", m.completion_rate);
    println!("grasp success rate  {:.3}", m.grasp_success_rate);
    println!("flip success rate   {:.3}", m.flip_success_rate);
    println!("push success rate   {:.3}", m.push_success_rate);
    match m.action_efficiency {
        Some(e) => println!("action efficiency   {e:.2} primitives/success"),
        None => println!("action efficiency   n/a (no successes)"),
    }
    println!(
        "METRICS {}",
        serde_json::to_string(m).expect("metrics serialize")
    );
}

#[allow(clippy::too_many_arguments)]
pub fn eval(
    checkpoint: &Path,
    config: Option<&Path>,
    episodes: u64,
    placement: PlacementArg,
    seed: u64,
    out: Option<&Path>,
    flip: FlipArg,
    epsilon: Option<f64>,
) -> Result<(), CliError> {
    if epsilon.is_some() {
        return Err(CliError::Config(
            "--epsilon is not supported: evaluation is always greedy".into(),
        ));
    }
    let mut cfg = load_config(config, None)?;
    cfg.env.flip_controller = match flip {
        FlipArg::Learned => FlipController::Learned,
        FlipArg::Manual => FlipController::Manual,
    };
    let (mut high, mut low) = load_agents(checkpoint, &cfg)?;
    let (metrics, records) = evaluate(
        &mut high,
        &mut low,
        &cfg.env,
        episodes,
        placement_of(placement),
        seed,
    )
    .map_err(runtime)?;
    print_metrics(&metrics);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(runtime)?;
        let records_path = dir.join("eval_records.jsonl");
        if records_path.exists() {
            std::fs::remove_file(&records_path).map_err(runtime)?;
        }
        io::append_episode_records(&records_path, &records).map_err(runtime)?;
        std::fs::write(
            dir.join("eval_metrics.json"),
            serde_json::to_string_pretty(&metrics).map_err(runtime)?,
        )
        .map_err(runtime)?;
        println!("wrote {}", records_path.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn export(
    checkpoint: &Path,
    config: Option<&Path>,
    record: Option<&Path>,
    episode: u64,
    scene_seed: u64,
    placement: PlacementArg,
    step: usize,
    what: &[WhatArg],
    out: &Path,
) -> Result<(), CliError> {
    let cfg = load_config(config, None)?;
    let (mut high, mut low) = load_agents(checkpoint, &cfg)?;
    let (master_seed, episode_idx, place) = match record {
        Some(path) => {
            let records = io::read_episode_records(path).map_err(runtime)?;
            let r = records
                .iter()
                .find(|r| r.episode == episode)
                .ok_or_else(|| {
                    CliError::Runtime(format!("record file has no episode {episode}"))
                })?;
            (r.seed, r.episode, r.placement)
        }
        None => (scene_seed, 0, placement_of(placement)),
    };
    let wanted: Vec<WhatArg> = if what.is_empty() {
        vec![WhatArg::Heightmap, WhatArg::Qmaps, WhatArg::Masks]
    } else {
        what.to_vec()
    };
    std::fs::create_dir_all(out).map_err(runtime)?;

    let mut exported = false;
    let mut io_err: Option<std::io::Error> = None;
    run_episode_observed(
        &cfg.env,
        &mut high,
        &mut low,
        Mode::Eval,
        place,
        master_seed,
        episode_idx,
        0.0,
        0.0,
        &mut |view| {
            if view.step != step || exported {
                return;
            }
            exported = true;
            for w in &wanted {
                let result = match w {
                    WhatArg::Heightmap => io::write_pgm(
                        &out.join(format!("heightmap_step{step}.pgm")),
                        &io::heightmap_image(view.obs),
                    ),
                    WhatArg::Qmaps => io::write_ppm(
                        &out.join(format!("qmaps_step{step}.ppm")),
                        &io::qmaps_tile_image(view.qmaps),
                    ),
                    WhatArg::Masks => io::write_pgm(
                        &out.join(format!("masks_step{step}.pgm")),
                        &io::masks_tile_image(view.masks),
                    ),
                };
                if let Err(e) = result {
                    io_err.get_or_insert(e);
                }
            }
        },
    )
    .map_err(runtime)?;
    if let Some(e) = io_err {
        return Err(runtime(e));
    }
    if !exported {
        return Err(CliError::Runtime(format!(
            "episode ended before step {step}; nothing exported"
        )));
    }
    println!("wrote step {step} images to {}", out.display());
    Ok(())
}
