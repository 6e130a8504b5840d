use flipgrasp::agents::{HighAgent, HighAgentConfig, LowAgent, LowAgentConfig};
use flipgrasp::primitives::{exec_flip_learned, OutcomeResult, PrimitiveCtx};
use flipgrasp::rng::{rng_for, stream};
use flipgrasp::sim::{reset, Placement, Simulator, WallId};
use flipgrasp::training::{
    analytic_flip_start, train_joint, train_low, EnvConfig, JointConfig, LowStageConfig, StageId,
};
use rand::Rng;

/// Greedy flip success on the jitter-stage start distribution.
fn greedy_rate(agent: &LowAgent, cfg: &EnvConfig, n: u64) -> f64 {
    let mut ok = 0;
    for ep in 0..n {
        let mut scene_rng = rng_for(99887, stream::SCENE, ep);
        let seed = scene_rng.random::<u64>();
        let state = reset(&cfg.physics, &cfg.adr.object, Placement::CloseToWall, 0.08, seed).unwrap();
        let fpw = state.object.footprint();
        let wall = WallId::ALL.into_iter().min_by(|a, b| a.gap(&fpw).total_cmp(&b.gap(&fpw))).unwrap();
        let start = analytic_flip_start(&state, wall, 0.02, 0.02, 10.0f64.to_radians(), &mut scene_rng);
        let mut sim = Simulator::new(cfg.physics, state);
        let mut rng = rng_for(1, stream::LOW_POLICY, ep);
        let out = exec_flip_learned(&mut sim, &start, agent, 0.0, &mut rng, &PrimitiveCtx::default());
        if out.result == OutcomeResult::FlipSuccess {
            ok += 1;
        }
    }
    ok as f64 / n as f64
}

fn main() {
    let cfg = EnvConfig::default();
    let mut low = LowAgent::new(LowAgentConfig::default(), 7);
    train_low(&mut low, &cfg, StageId::LowFlush, &LowStageConfig::flush(), 7).unwrap();
    train_low(&mut low, &cfg, StageId::LowJitter, &LowStageConfig::jitter(), 1007).unwrap();
    println!("post-curriculum greedy flip rate: {:.2}", greedy_rate(&low, &cfg, 100));

    let mut high = HighAgent::new(HighAgentConfig::default(), 42);
    let joint = JointConfig { episodes: 400, stop_at_completion: None, ..JointConfig::default() };
    train_joint(&mut high, &mut low, &cfg, &joint, 4242, 0);
    println!("after 400 joint episodes (low training ON): {:.2}", greedy_rate(&low, &cfg, 100));
}
