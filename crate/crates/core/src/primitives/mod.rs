//! Executable manipulation primitives and their reward functions.
//!
//! Push and grasp are scripted controllers. Flip comes in two flavors: the
//! learned low-level DQN rollout and a manually designed three-stage
//! baseline used as an ablation.

mod flip_learned;
mod flip_manual;
mod grasp;
mod push;
mod rewards;

pub use flip_learned::exec_flip_learned;
pub use flip_manual::{exec_flip_manual, ManualFlipParams};
pub use grasp::exec_grasp;
pub use push::exec_push;
pub use rewards::{high_reward, low_reward};

use serde::{Deserialize, Serialize};

use crate::agents::{LowActionParams, LowTransition, Primitive};
use crate::sim::{CheckParams, WorkspaceState};

/// How a primitive execution ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeResult {
    AtWall,
    Changed,
    NoChange,
    FlipSuccess,
    FlipFail,
    GraspSuccess,
    GraspFail,
    /// Flip aborted because the contact force crossed the safety limit.
    ForceAbort,
}

/// Full record of one primitive execution.
#[derive(Debug, Clone)]
pub struct PrimitiveOutcome {
    pub kind: Primitive,
    pub result: OutcomeResult,
    pub before: WorkspaceState,
    pub after: WorkspaceState,
    /// Low-level replay records; learned flips only.
    pub low_transitions: Vec<LowTransition>,
}

impl PrimitiveOutcome {
    /// Result variants legal for each primitive kind.
    pub fn is_consistent(&self) -> bool {
        use OutcomeResult::*;
        match self.kind {
            Primitive::Push => matches!(self.result, AtWall | Changed | NoChange),
            Primitive::Flip => matches!(self.result, FlipSuccess | FlipFail | ForceAbort),
            Primitive::Grasp => matches!(self.result, GraspSuccess | GraspFail),
        }
    }
}

/// Reward constants shared by both levels.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RewardParams {
    /// Upper bound of the shaped contact reward.
    pub sigma: f64,
    /// Height normalizer for the shaped reward, m.
    pub w: f64,
    /// Safety contact force, N. Must stay below the simulator force cap.
    pub f_limit: f64,
    pub r_push_wall: f64,
    pub r_push_change: f64,
    pub r_flip: f64,
    pub r_grasp: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            sigma: 0.2,
            w: 0.1,
            f_limit: 30.0,
            r_push_wall: 0.2,
            r_push_change: 0.1,
            r_flip: 1.0,
            r_grasp: 1.0,
        }
    }
}

/// Controller constants for the scripted parts of the primitives.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExecParams {
    /// Push translation length, m.
    pub push_stroke: f64,
    /// Grasp lift height, m.
    pub grasp_lift: f64,
    /// Fingertip depth below the object top when grasping, m.
    pub grasp_depth: f64,
    /// Wall rim height: fingers may dangle outside the workspace only above
    /// it, m.
    pub rim_height: f64,
    /// Maximum grasp-line offset from the object center, m.
    pub grasp_center_tol: f64,
    /// Closed-finger separation must match an object dimension within this,
    /// m.
    pub grasp_dim_tol: f64,
    /// Low-level horizon T, steps.
    pub horizon: usize,
    /// Flip steps allowed in contact before any pitch shows. Without a
    /// stall cutoff, holding a light press for the whole horizon collects
    /// more shaped reward than completing the flip, and the low-level agent
    /// learns exactly that.
    pub stall_press_steps: usize,
    /// Flip steps allowed without pitch progress once pitching has begun.
    pub stall_pitch_steps: usize,
    pub low_action: LowActionParams,
}

impl Default for ExecParams {
    fn default() -> Self {
        Self {
            push_stroke: 0.10,
            grasp_lift: 0.10,
            grasp_depth: 0.015,
            rim_height: 0.06,
            grasp_center_tol: 0.02,
            grasp_dim_tol: 0.005,
            horizon: 35,
            stall_press_steps: 14,
            stall_pitch_steps: 6,
            low_action: LowActionParams::default(),
        }
    }
}

/// Everything a primitive needs besides the simulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct PrimitiveCtx {
    pub check: CheckParams,
    pub reward: RewardParams,
    pub exec: ExecParams,
    pub manual: ManualFlipParams,
}
