//! The high-level episode loop: observe, mask, select, execute, reward,
//! store, repeat until a grasp succeeds or the primitive budget runs out.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{
    select_high_action, AgentError, HighAgent, HighLevelAction, HighTransition, LowAgent,
    Primitive,
};
use crate::perception::{
    compute_masks_from_stack, corrupt, pixel_to_pose, render_height_map, rotate_stack, HeightMap,
};
use crate::primitives::{
    exec_flip_learned, exec_flip_manual, exec_grasp, exec_push, high_reward, OutcomeResult,
    PrimitiveCtx, PrimitiveOutcome,
};
use crate::rng::{rng_for, stream};
use crate::sim::{reset, Dims, Placement, Simulator, WorkspaceState};

use super::EnvConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Which flip controller run_episode dispatches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipController {
    Learned,
    Manual,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub action: ActionRecord,
    pub outcome: OutcomeResult,
    pub reward: f64,
    pub low_steps: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ActionRecord {
    pub x: usize,
    pub y: usize,
    pub i: usize,
    pub phi: Primitive,
}

impl From<HighLevelAction> for ActionRecord {
    fn from(a: HighLevelAction) -> Self {
        Self {
            x: a.x,
            y: a.y,
            i: a.i,
            phi: a.phi,
        }
    }
}

/// Scene header plus the action/outcome/reward trace of one episode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    pub seed: u64,
    pub placement: Placement,
    pub object_dims: Dims,
    pub object_mass: f64,
    pub object_friction: f64,
    pub steps: Vec<StepRecord>,
    pub success: bool,
    pub primitives_used: usize,
    /// Mean losses over the episode's gradient steps, train mode only.
    pub loss_high: Option<f64>,
    pub loss_low: Option<f64>,
}

pub struct EpisodeOutput {
    pub record: EpisodeRecord,
    pub final_state: WorkspaceState,
}

/// Everything visible at one decision point, for visualization exports.
pub struct StepView<'a> {
    pub step: usize,
    pub obs: &'a HeightMap,
    pub qmaps: &'a crate::agents::QMapSet,
    pub masks: &'a crate::perception::MaskSet,
    pub action: HighLevelAction,
}

/// Run one episode. Every random draw derives from (`master_seed`,
/// `episode`), so records are bitwise reproducible.
#[allow(clippy::too_many_arguments)]
pub fn run_episode(
    cfg: &EnvConfig,
    high: &mut HighAgent,
    low: &mut LowAgent,
    mode: Mode,
    placement: Placement,
    master_seed: u64,
    episode: u64,
    eps_high: f64,
    eps_low: f64,
) -> Result<EpisodeOutput, AgentError> {
    run_episode_observed(
        cfg,
        high,
        low,
        mode,
        placement,
        master_seed,
        episode,
        eps_high,
        eps_low,
        &mut |_| {},
    )
}

/// [`run_episode`] with a per-step observer invoked after action selection.
#[allow(clippy::too_many_arguments)]
pub fn run_episode_observed(
    cfg: &EnvConfig,
    high: &mut HighAgent,
    low: &mut LowAgent,
    mode: Mode,
    placement: Placement,
    master_seed: u64,
    episode: u64,
    eps_high: f64,
    eps_low: f64,
    observer: &mut dyn FnMut(StepView<'_>),
) -> Result<EpisodeOutput, AgentError> {
    let scene_seed = rng_for(master_seed, stream::SCENE, episode).random::<u64>();
    let state = reset(
        &cfg.physics,
        &cfg.adr.object,
        placement,
        cfg.max_opening,
        scene_seed,
    )
    .expect("validated ranges fit the workspace");
    let object = state.object;
    let mut sim = Simulator::new(cfg.physics, state);

    let mut noise_rng = rng_for(master_seed, stream::NOISE, episode);
    let mut policy_rng = rng_for(master_seed, stream::HIGH_POLICY, episode);
    let mut low_rng = rng_for(master_seed, stream::LOW_POLICY, episode);
    let mut high_replay_rng = rng_for(master_seed, stream::HIGH_REPLAY, episode);
    let mut low_replay_rng = rng_for(master_seed, stream::LOW_REPLAY, episode);

    let render = |sim: &Simulator, rng: &mut rand_chacha::ChaCha8Rng| -> HeightMap {
        let clean = render_height_map(&sim.state);
        corrupt(&clean, &cfg.adr.noise, rng.random::<u64>())
    };

    let mut obs = render(&sim, &mut noise_rng);
    let mut steps = Vec::new();
    let mut success = false;
    let mut high_losses = Vec::new();
    let mut low_losses = Vec::new();

    for step in 1..=cfg.max_primitives {
        let stack = rotate_stack(&obs);
        let masks = compute_masks_from_stack(&stack, &cfg.perception.mask);
        let qmaps = high.q_maps(&high.net, &stack)?;
        let action = match select_high_action(&qmaps, &masks, eps_high, &mut policy_rng) {
            Ok(a) => a,
            Err(AgentError::NoAdmissibleAction) => break,
            Err(e) => return Err(e),
        };
        observer(StepView {
            step,
            obs: &obs,
            qmaps: &qmaps,
            masks: &masks,
            action,
        });
        let outcome = execute(
            cfg,
            &mut sim,
            &obs,
            action,
            low,
            eps_low,
            &mut low_rng,
            mode,
        );
        let reward = high_reward(outcome.result, &cfg.primitive.reward);
        debug_assert!(outcome.is_consistent());

        let next_obs = render(&sim, &mut noise_rng);
        let terminal =
            outcome.result == OutcomeResult::GraspSuccess || step == cfg.max_primitives;
        let low_steps = outcome.low_transitions.len();

        if mode == Mode::Train {
            for tr in &outcome.low_transitions {
                low.replay.push(*tr);
                if cfg.train_low_in_joint {
                    if let Some(loss) = low
                        .train_from_replay(&mut low_replay_rng)
                        .map_err(AgentError::Nn)?
                    {
                        low_losses.push(loss);
                    }
                }
            }
            high.push_transition(HighTransition {
                obs: obs.clone(),
                action,
                reward,
                next_obs: next_obs.clone(),
                terminal,
            });
            if step % cfg.high_train_every.max(1) == 0 {
                if let Some(loss) = high.train_from_replay(&mut high_replay_rng)? {
                    high_losses.push(loss);
                }
            }
        }

        steps.push(StepRecord {
            step,
            action: action.into(),
            outcome: outcome.result,
            reward,
            low_steps,
        });
        obs = next_obs;
        if outcome.result == OutcomeResult::GraspSuccess {
            success = true;
            break;
        }
    }

    let mean = |v: &[f64]| {
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    };
    Ok(EpisodeOutput {
        record: EpisodeRecord {
            episode,
            seed: master_seed,
            placement,
            object_dims: object.dims,
            object_mass: object.mass,
            object_friction: object.friction_mu,
            primitives_used: steps.len(),
            steps,
            success,
            loss_high: mean(&high_losses),
            loss_low: mean(&low_losses),
        },
        final_state: sim.state,
    })
}

/// Dispatch one primitive. An unreachable start pose degrades to the
/// primitive's failure outcome without touching the scene.
#[allow(clippy::too_many_arguments)]
fn execute(
    cfg: &EnvConfig,
    sim: &mut Simulator,
    obs: &HeightMap,
    action: HighLevelAction,
    low: &mut LowAgent,
    eps_low: f64,
    low_rng: &mut rand_chacha::ChaCha8Rng,
    mode: Mode,
) -> PrimitiveOutcome {
    let ctx = PrimitiveCtx {
        check: cfg.primitive.check,
        reward: cfg.primitive.reward,
        exec: cfg.primitive.exec,
        manual: cfg.primitive.manual,
    };
    let start = match pixel_to_pose(
        action.x,
        action.y,
        action.i,
        obs,
        cfg.perception.start_clearance,
    ) {
        Ok(s) => s,
        Err(_) => {
            let state = sim.state.clone();
            let result = match action.phi {
                Primitive::Push => OutcomeResult::NoChange,
                Primitive::Flip => OutcomeResult::FlipFail,
                Primitive::Grasp => OutcomeResult::GraspFail,
            };
            return PrimitiveOutcome {
                kind: action.phi,
                result,
                before: state.clone(),
                after: state,
                low_transitions: Vec::new(),
            };
        }
    };
    match action.phi {
        Primitive::Push => exec_push(sim, &start, &ctx),
        Primitive::Grasp => exec_grasp(sim, &start, &ctx),
        Primitive::Flip => match cfg.flip_controller {
            FlipController::Manual => exec_flip_manual(sim, &start, &ctx),
            FlipController::Learned => {
                let eps = if mode == Mode::Train { eps_low } else { 0.0 };
                exec_flip_learned(sim, &start, low, eps, low_rng, &ctx)
            }
        },
    }
}
