//! Curriculum stages for the low-level flip controller.
//!
//! The low-level agent trains before the high-level agent ever acts:
//! first from near-ideal starts behind a wall-flush object, then with
//! jittered starts. Each stage gates on the trailing flip-success rate.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::LowAgent;
use crate::nn::NnError;
use crate::perception::StartPose;
use crate::primitives::{exec_flip_learned, OutcomeResult, PrimitiveCtx};
use crate::rng::{rng_for, stream};
use crate::sim::{reset, Placement, Simulator, WallId, WorkspaceState};

use super::window::TrailingWindow;
use super::EnvConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageId {
    LowFlush,
    LowJitter,
    Joint,
}

/// One low-level curriculum stage: an episode budget, an advancement gate on
/// the trailing-100 flip success rate, and the start-pose jitter that makes
/// the stage easy or hard.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LowStageConfig {
    pub episodes: u64,
    /// Trailing flip-success rate that ends the stage early.
    pub gate: f64,
    /// Episodes before the gate is consulted. The trailing window under high
    /// epsilon measures the exploration mix, not the policy; gating early
    /// ships an agent that cannot flip greedily.
    pub min_episodes: u64,
    /// Start position jitter, m.
    pub pos_jitter: f64,
    /// Start yaw jitter, rad.
    pub yaw_jitter: f64,
    /// Episodes over which epsilon decays linearly 1 -> 0.1.
    pub epsilon_decay_episodes: u64,
}

impl LowStageConfig {
    pub fn flush() -> Self {
        Self {
            episodes: 3000,
            gate: 0.7,
            min_episodes: 700,
            pos_jitter: 0.005,
            yaw_jitter: 0.0,
            epsilon_decay_episodes: 600,
        }
    }

    pub fn jitter() -> Self {
        Self {
            episodes: 2500,
            gate: 0.7,
            min_episodes: 500,
            pos_jitter: 0.02,
            yaw_jitter: 10.0f64.to_radians(),
            epsilon_decay_episodes: 400,
        }
    }

    pub fn epsilon(&self, episode: u64) -> f64 {
        (1.0 - 0.9 * episode as f64 / self.epsilon_decay_episodes.max(1) as f64).max(0.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    GateMet,
    GateNotMet,
}

#[derive(Debug, Clone)]
pub struct StageReport {
    pub stage: StageId,
    pub status: StageStatus,
    pub episodes_run: u64,
    /// Trailing flip-success rate per episode.
    pub curve: Vec<f64>,
}

/// Analytic flip start behind the object's wall-side face, facing the wall,
/// jittered per the stage config.
pub fn analytic_flip_start(
    state: &WorkspaceState,
    wall: WallId,
    clearance: f64,
    pos_jitter: f64,
    yaw_jitter: f64,
    rng: &mut ChaCha8Rng,
) -> StartPose {
    let n = wall.normal_out();
    let fp = state.object.footprint();
    let half_n = fp.extent_along(n) / 2.0;
    let center = state.object.center();
    let base = center - n.scaled(half_n + 0.004);
    let jx = if pos_jitter > 0.0 {
        rng.random_range(-pos_jitter..pos_jitter)
    } else {
        0.0
    };
    let jy = if pos_jitter > 0.0 {
        rng.random_range(-pos_jitter..pos_jitter)
    } else {
        0.0
    };
    let jyaw = if yaw_jitter > 0.0 {
        rng.random_range(-yaw_jitter..yaw_jitter)
    } else {
        0.0
    };
    StartPose {
        x: base.x + jx,
        y: base.y + jy,
        z: clearance,
        yaw: n.y.atan2(n.x) + jyaw,
    }
}

/// Nearest wall by footprint gap.
fn nearest_wall(state: &WorkspaceState) -> WallId {
    let fp = state.object.footprint();
    WallId::ALL
        .into_iter()
        .min_by(|a, b| a.gap(&fp).total_cmp(&b.gap(&fp)))
        .unwrap()
}

/// Train the low-level agent on one stage: every episode is a single flip
/// rollout on a wall-flush randomized object, with one gradient step per
/// emitted transition.
pub fn train_low(
    agent: &mut LowAgent,
    cfg: &EnvConfig,
    stage_id: StageId,
    stage: &LowStageConfig,
    master_seed: u64,
) -> Result<StageReport, NnError> {
    assert!(matches!(stage_id, StageId::LowFlush | StageId::LowJitter));
    let mut window = TrailingWindow::new(100);
    let mut curve = Vec::with_capacity(stage.episodes as usize);
    let mut status = StageStatus::GateNotMet;
    let mut episodes_run = 0;
    let ctx = PrimitiveCtx {
        check: cfg.primitive.check,
        reward: cfg.primitive.reward,
        exec: cfg.primitive.exec,
        manual: cfg.primitive.manual,
    };

    for episode in 0..stage.episodes {
        episodes_run = episode + 1;
        let mut scene_rng = rng_for(master_seed, stream::SCENE, episode);
        let scene_seed = scene_rng.random::<u64>();
        let state = reset(
            &cfg.physics,
            &cfg.adr.object,
            Placement::CloseToWall,
            cfg.max_opening,
            scene_seed,
        )
        .expect("validated ranges fit the workspace");
        let wall = nearest_wall(&state);
        let start = analytic_flip_start(
            &state,
            wall,
            cfg.perception.start_clearance,
            stage.pos_jitter,
            stage.yaw_jitter,
            &mut scene_rng,
        );

        let mut sim = Simulator::new(cfg.physics, state);
        let mut low_rng = rng_for(master_seed, stream::LOW_POLICY, episode);
        let mut replay_rng = rng_for(master_seed, stream::LOW_REPLAY, episode);
        let eps = stage.epsilon(episode);
        let outcome = exec_flip_learned(&mut sim, &start, agent, eps, &mut low_rng, &ctx);
        for tr in &outcome.low_transitions {
            agent.replay.push(*tr);
            agent.train_from_replay(&mut replay_rng)?;
        }
        window.push(outcome.result == OutcomeResult::FlipSuccess);
        curve.push(window.rate());
        if episodes_run >= stage.min_episodes && window.full() && window.rate() >= stage.gate {
            status = StageStatus::GateMet;
            break;
        }
    }
    Ok(StageReport {
        stage: stage_id,
        status,
        episodes_run,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::LowAgentConfig;
    use crate::sim::{ObjectRanges, Vec2};

    #[test]
    fn stage_jitters_strictly_increase_across_the_curriculum() {
        let flush = LowStageConfig::flush();
        let jitter = LowStageConfig::jitter();
        assert!(jitter.pos_jitter > flush.pos_jitter);
        assert!(jitter.yaw_jitter > flush.yaw_jitter);
    }

    #[test]
    fn untrained_agent_reports_gate_not_met_on_zero_budget() {
        let mut agent = LowAgent::new(LowAgentConfig::default(), 1);
        let cfg = EnvConfig::default();
        let stage = LowStageConfig {
            episodes: 0,
            ..LowStageConfig::flush()
        };
        let report = train_low(&mut agent, &cfg, StageId::LowFlush, &stage, 3).unwrap();
        assert_eq!(report.status, StageStatus::GateNotMet);
        assert_eq!(report.episodes_run, 0);
    }

    #[test]
    fn analytic_start_faces_the_wall_from_behind_the_object() {
        let cfg = EnvConfig::default();
        let ranges = ObjectRanges::default();
        let state = reset(&cfg.physics, &ranges, Placement::CloseToWall, 0.08, 42).unwrap();
        let wall = nearest_wall(&state);
        let mut rng = rng_for(0, stream::SCENE, 0);
        let start = analytic_flip_start(&state, wall, 0.02, 0.0, 0.0, &mut rng);
        // Pushing from the start along its yaw must head into the wall.
        let n = wall.normal_out();
        let dir = Vec2::from_angle(start.yaw);
        assert!(dir.dot(n) > 0.99);
        // Start sits on the open side of the object.
        let to_obj = state.object.center() - Vec2::new(start.x, start.y);
        assert!(to_obj.dot(n) > 0.0);
    }
}
