//! Episode-loop bookkeeping invariants.

use flipgrasp::agents::{HighAgent, HighAgentConfig, LowAgent, LowAgentConfig};
use flipgrasp::primitives::{high_reward, RewardParams};
use flipgrasp::sim::Placement;
use flipgrasp::training::{run_episode, EnvConfig, Mode};

#[test]
fn logged_rewards_equal_recomputation_from_outcomes() {
    let cfg = EnvConfig::default();
    let p = RewardParams::default();
    let mut high = HighAgent::new(HighAgentConfig::default(), 31);
    let mut low = LowAgent::new(LowAgentConfig::default(), 32);
    for ep in 0..5 {
        let out = run_episode(
            &cfg,
            &mut high,
            &mut low,
            Mode::Eval,
            Placement::Random,
            55,
            ep,
            0.0,
            0.0,
        )
        .unwrap();
        let logged: f64 = out.record.steps.iter().map(|s| s.reward).sum();
        let recomputed: f64 = out
            .record
            .steps
            .iter()
            .map(|s| high_reward(s.outcome, &p))
            .sum();
        assert_eq!(logged, recomputed, "episode {ep}");
    }
}

#[test]
fn episode_budget_is_respected_and_terminal_on_grasp() {
    let cfg = EnvConfig::default();
    let mut high = HighAgent::new(HighAgentConfig::default(), 41);
    let mut low = LowAgent::new(LowAgentConfig::default(), 42);
    for ep in 0..6 {
        let out = run_episode(
            &cfg,
            &mut high,
            &mut low,
            Mode::Eval,
            Placement::CloseToWall,
            66,
            ep,
            0.0,
            0.0,
        )
        .unwrap();
        assert!(out.record.steps.len() <= cfg.max_primitives);
        if out.record.success {
            let last = out.record.steps.last().unwrap();
            assert_eq!(
                last.outcome,
                flipgrasp::primitives::OutcomeResult::GraspSuccess
            );
        }
    }
}
