//! Training orchestration: domain randomization, the curriculum, the joint
//! episode loop, and the evaluation harness.

mod adr;
mod episode;
mod eval;
mod joint;
mod low_stage;
mod window;

pub use adr::DomainRandomizationSpec;
pub use episode::{
    run_episode, run_episode_observed, ActionRecord, EpisodeOutput, EpisodeRecord,
    FlipController, Mode, StepRecord, StepView,
};
pub use eval::{evaluate, EvalError, Metrics};
pub use joint::{
    epsilon_schedule, train_joint, JointConfig, JointReport, JointStatus, LossRow, MetricsRow,
};
pub use low_stage::{
    analytic_flip_start, train_low, LowStageConfig, StageId, StageReport, StageStatus,
};
pub use window::TrailingWindow;

use crate::perception::PerceptionParams;
use crate::primitives::{ExecParams, ManualFlipParams, RewardParams};
use crate::sim::{CheckParams, PhysicsParams, DEFAULT_MAX_OPENING};

/// Outcome predicates, rewards, and controller constants bundled for the
/// episode loop.
#[derive(Debug, Clone, Copy, Default)]
pub struct PrimitiveConfig {
    pub check: CheckParams,
    pub reward: RewardParams,
    pub exec: ExecParams,
    pub manual: ManualFlipParams,
}

/// Everything the episode loop needs to build and run scenes.
#[derive(Debug, Clone)]
pub struct EnvConfig {
    pub physics: PhysicsParams,
    pub adr: DomainRandomizationSpec,
    pub perception: PerceptionParams,
    pub primitive: PrimitiveConfig,
    pub max_opening: f64,
    /// Episode budget in primitives.
    pub max_primitives: usize,
    pub flip_controller: FlipController,
    /// Keep updating the low-level agent during joint training.
    pub train_low_in_joint: bool,
    /// High-level gradient step cadence, in executed primitives. Each step
    /// costs a batch of target-stack evaluations; training on every
    /// primitive roughly triples episode time for little extra learning.
    pub high_train_every: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            physics: PhysicsParams::default(),
            adr: DomainRandomizationSpec::default(),
            perception: PerceptionParams::default(),
            primitive: PrimitiveConfig::default(),
            max_opening: DEFAULT_MAX_OPENING,
            max_primitives: 10,
            flip_controller: FlipController::Learned,
            train_low_in_joint: true,
            high_train_every: 3,
        }
    }
}
