//! Greedy evaluation harness.

use serde::{Deserialize, Serialize};

use crate::agents::{HighAgent, LowAgent, Primitive};
use crate::primitives::OutcomeResult;
use crate::sim::Placement;

use super::episode::{run_episode, EpisodeRecord, Mode};
use super::EnvConfig;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("empty evaluation: n_episodes must be positive")]
    Empty,
    #[error(transparent)]
    Agent(#[from] crate::agents::AgentError),
}

/// Success statistics over an evaluation run. Per-primitive rates follow the
/// trailing-100-attempts protocol; with short runs that is simply the last
/// 100 attempts of each primitive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metrics {
    pub completion_rate: f64,
    pub grasp_success_rate: f64,
    pub flip_success_rate: f64,
    pub push_success_rate: f64,
    /// Mean primitives per successful episode; None when nothing succeeded.
    pub action_efficiency: Option<f64>,
    pub episodes: u64,
}

fn trailing_rate(hits: &[bool], window: usize) -> f64 {
    if hits.is_empty() {
        return 0.0;
    }
    let tail = &hits[hits.len().saturating_sub(window)..];
    tail.iter().filter(|&&b| b).count() as f64 / tail.len() as f64
}

/// Evaluate the greedy policy over `n_episodes` fresh scenes.
pub fn evaluate(
    high: &mut HighAgent,
    low: &mut LowAgent,
    cfg: &EnvConfig,
    n_episodes: u64,
    placement: Placement,
    master_seed: u64,
) -> Result<(Metrics, Vec<EpisodeRecord>), EvalError> {
    if n_episodes == 0 {
        return Err(EvalError::Empty);
    }
    let mut records = Vec::with_capacity(n_episodes as usize);
    let mut successes = 0u64;
    let mut grasp_hits = Vec::new();
    let mut flip_hits = Vec::new();
    let mut push_hits = Vec::new();
    let mut used = Vec::new();
    for episode in 0..n_episodes {
        let out = run_episode(
            cfg,
            high,
            low,
            Mode::Eval,
            placement,
            master_seed,
            episode,
            0.0,
            0.0,
        )?;
        let record = out.record;
        if record.success {
            successes += 1;
            used.push(record.primitives_used as f64);
        }
        for s in &record.steps {
            match s.action.phi {
                Primitive::Grasp => grasp_hits.push(s.outcome == OutcomeResult::GraspSuccess),
                Primitive::Flip => flip_hits.push(s.outcome == OutcomeResult::FlipSuccess),
                Primitive::Push => push_hits.push(matches!(
                    s.outcome,
                    OutcomeResult::AtWall | OutcomeResult::Changed
                )),
            }
        }
        records.push(record);
    }
    let metrics = Metrics {
        completion_rate: successes as f64 / n_episodes as f64,
        grasp_success_rate: trailing_rate(&grasp_hits, 100),
        flip_success_rate: trailing_rate(&flip_hits, 100),
        push_success_rate: trailing_rate(&push_hits, 100),
        action_efficiency: if used.is_empty() {
            None
        } else {
            Some(used.iter().sum::<f64>() / used.len() as f64)
        },
        episodes: n_episodes,
    };
    Ok((metrics, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{HighAgentConfig, LowAgentConfig};

    #[test]
    fn zero_episodes_is_an_error() {
        let mut high = HighAgent::new(HighAgentConfig::default(), 1);
        let mut low = LowAgent::new(LowAgentConfig::default(), 2);
        let err = evaluate(
            &mut high,
            &mut low,
            &EnvConfig::default(),
            0,
            Placement::Random,
            1,
        )
        .unwrap_err();
        assert!(err.to_string().contains("empty evaluation"));
    }

    #[test]
    fn evaluation_is_deterministic_per_seed() {
        let cfg = EnvConfig::default();
        let run = || {
            let mut high = HighAgent::new(HighAgentConfig::default(), 11);
            let mut low = LowAgent::new(LowAgentConfig::default(), 12);
            let (m, records) =
                evaluate(&mut high, &mut low, &cfg, 3, Placement::Random, 5).unwrap();
            (
                serde_json::to_string(&m).unwrap(),
                serde_json::to_string(&records).unwrap(),
            )
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn untrained_random_policy_rarely_completes() {
        // Fresh nets, greedy: a sanity bound, not a learning test.
        let cfg = EnvConfig::default();
        let mut high = HighAgent::new(HighAgentConfig::default(), 21);
        let mut low = LowAgent::new(LowAgentConfig::default(), 22);
        let (m, _) = evaluate(&mut high, &mut low, &cfg, 20, Placement::Random, 9).unwrap();
        assert!(
            m.completion_rate <= 0.25,
            "untrained agent completed {:.0}%",
            m.completion_rate * 100.0
        );
    }
}
