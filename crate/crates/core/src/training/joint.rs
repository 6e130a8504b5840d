//! Joint training of both agents on the full task.

use serde::{Deserialize, Serialize};

use crate::agents::{HighAgent, LowAgent, Primitive};
use crate::nn::Network;
use crate::primitives::OutcomeResult;
use crate::sim::Placement;

use super::episode::{run_episode, EpisodeRecord, Mode};
use super::window::TrailingWindow;
use super::EnvConfig;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct JointConfig {
    pub episodes: u64,
    /// Linear epsilon decay 1 -> 0.1 over this many episodes, then flat.
    pub epsilon_decay_episodes: u64,
    /// Stop early once the trailing completion rate reaches this, if set.
    pub stop_at_completion: Option<f64>,
    /// Keep a rollback copy of both networks this often, episodes.
    pub checkpoint_every: u64,
}

impl Default for JointConfig {
    fn default() -> Self {
        Self {
            episodes: 2000,
            epsilon_decay_episodes: 400,
            stop_at_completion: Some(0.75),
            checkpoint_every: 100,
        }
    }
}

/// Shared epsilon schedule, clocked by high-level episodes.
pub fn epsilon_schedule(episode: u64, decay_episodes: u64) -> f64 {
    (1.0 - 0.9 * episode as f64 / decay_episodes.max(1) as f64).max(0.1)
}

/// One metrics log line per training episode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsRow {
    pub episode: u64,
    pub completion_trailing: f64,
    pub grasp_rate: f64,
    pub flip_rate: f64,
    pub efficiency: Option<f64>,
    pub epsilon: f64,
    pub losses: LossRow,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossRow {
    pub high: Option<f64>,
    pub low: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointStatus {
    CompletionGateMet,
    BudgetExhausted,
    /// Training diverged; agents were rolled back to the last checkpoint.
    DivergedRolledBack,
}

pub struct JointReport {
    pub status: JointStatus,
    pub episodes_run: u64,
    pub metrics: Vec<MetricsRow>,
    pub records: Vec<EpisodeRecord>,
}

/// Train the high-level selector together with (by default) the low-level
/// controller, on randomly placed randomized objects. Metrics follow the
/// trailing-100 protocol; both networks roll back to the last periodic
/// checkpoint if a loss diverges.
///
/// `start_episode` resumes the episode numbering; the budget
/// `joint.episodes` is the absolute episode count.
pub fn train_joint(
    high: &mut HighAgent,
    low: &mut LowAgent,
    cfg: &EnvConfig,
    joint: &JointConfig,
    master_seed: u64,
    start_episode: u64,
) -> JointReport {
    let mut completion = TrailingWindow::new(100);
    let mut grasp = TrailingWindow::new(100);
    let mut flip = TrailingWindow::new(100);
    let mut efficiency = std::collections::VecDeque::with_capacity(100);
    let mut metrics = Vec::new();
    let mut records = Vec::new();
    let mut status = JointStatus::BudgetExhausted;
    let mut episodes_run = 0;
    let mut backup: (Network<f32>, Network<f32>) = (high.net.clone(), low.net.clone());

    for episode in start_episode..joint.episodes {
        episodes_run = episode + 1 - start_episode;
        let eps = epsilon_schedule(episode, joint.epsilon_decay_episodes);
        let out = match run_episode(
            cfg,
            high,
            low,
            Mode::Train,
            Placement::Random,
            master_seed,
            episode,
            eps,
            eps,
        ) {
            Ok(out) => out,
            Err(_) => {
                high.net.copy_params_from(&backup.0);
                low.net.copy_params_from(&backup.1);
                status = JointStatus::DivergedRolledBack;
                break;
            }
        };
        let record = out.record;
        completion.push(record.success);
        for s in &record.steps {
            match s.action.phi {
                Primitive::Grasp => grasp.push(s.outcome == OutcomeResult::GraspSuccess),
                Primitive::Flip => flip.push(s.outcome == OutcomeResult::FlipSuccess),
                Primitive::Push => {}
            }
        }
        if record.success {
            if efficiency.len() == 100 {
                efficiency.pop_front();
            }
            efficiency.push_back(record.primitives_used as f64);
        }
        metrics.push(MetricsRow {
            episode,
            completion_trailing: completion.rate(),
            grasp_rate: grasp.rate(),
            flip_rate: flip.rate(),
            efficiency: if efficiency.is_empty() {
                None
            } else {
                Some(efficiency.iter().sum::<f64>() / efficiency.len() as f64)
            },
            epsilon: eps,
            losses: LossRow {
                high: record.loss_high,
                low: record.loss_low,
            },
        });
        records.push(record);

        if episode % joint.checkpoint_every == joint.checkpoint_every - 1 {
            backup = (high.net.clone(), low.net.clone());
        }
        if let Some(gate) = joint.stop_at_completion {
            if completion.full() && completion.rate() >= gate {
                status = JointStatus::CompletionGateMet;
                break;
            }
        }
    }
    JointReport {
        status,
        episodes_run,
        metrics,
        records,
    }
}
