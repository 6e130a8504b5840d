//! The low-level flip controller: a small MLP DQN over the pose-invariant
//! state (p_al, f_d, f_max).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{train_step, Adam, LayerSpec, MaskedSample, Network, NetworkSpec, NnError, Tensor};
use crate::perception::StartPose;
use crate::sim::{ContactReading, EndEffectorState, Vec2};

use super::actions::{LowActionParams, LowLevelAction};
use super::replay::ReplayBuffer;

/// End-effector state expressed in the primitive's start frame, so the
/// policy is independent of where the flip begins.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LowState {
    /// Displacement along the start yaw direction, m.
    pub d: f64,
    /// Vertical displacement from the start pose, m.
    pub z: f64,
    /// Tool tilt relative to the start pose, rad.
    pub theta_y: f64,
    /// Contact force along the forward axis, N.
    pub f_d: f64,
    /// Peak contact force seen so far, N.
    pub f_max: f64,
}

/// Project the end-effector pose into the start frame of the running
/// primitive. Two episodes with identical relative trajectories produce
/// identical states regardless of the global start pose.
pub fn project_low_state(
    ee: &EndEffectorState,
    start: &StartPose,
    contact: &ContactReading,
) -> LowState {
    let fwd = Vec2::from_angle(start.yaw);
    let offset = Vec2::new(ee.pose.x - start.x, ee.pose.y - start.y);
    LowState {
        d: offset.dot(fwd),
        z: ee.pose.z - start.z,
        theta_y: ee.pose.pitch_y,
        f_d: contact.f_d,
        f_max: contact.f_max,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowTransition {
    pub state: LowState,
    pub action: LowLevelAction,
    pub reward: f64,
    pub next_state: LowState,
    pub terminal: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LowAgentConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Hard target copy cadence, gradient steps.
    pub target_every: u64,
    /// Transitions required in the buffer before gradient steps begin.
    pub warmup: usize,
    /// Evaluate the online argmax under the target net instead of taking the
    /// raw target max. Plain backups oscillate on this task.
    pub double_dqn: bool,
    pub action: LowActionParams,
    /// Position feature scale, m.
    pub pos_scale: f64,
    /// Force feature scale, N.
    pub force_scale: f64,
}

impl Default for LowAgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.98,
            learning_rate: 3e-4,
            batch_size: 64,
            replay_capacity: 50_000,
            target_every: 300,
            warmup: 2000,
            double_dqn: true,
            action: LowActionParams::default(),
            pos_scale: 0.1,
            force_scale: 30.0,
        }
    }
}

/// 5 -> 64 -> 64 -> 12 MLP over the pose-invariant state.
pub fn mlp_spec() -> NetworkSpec {
    NetworkSpec::new(
        &[5],
        vec![
            LayerSpec::Dense { input: 5, output: 64 },
            LayerSpec::Relu,
            LayerSpec::Dense {
                input: 64,
                output: 64,
            },
            LayerSpec::Relu,
            LayerSpec::Dense {
                input: 64,
                output: LowLevelAction::COUNT,
            },
        ],
    )
    .expect("static spec")
}

pub struct LowAgent {
    pub net: Network<f32>,
    pub target: Network<f32>,
    pub replay: ReplayBuffer<LowTransition>,
    pub config: LowAgentConfig,
    opt: Adam<f32>,
    grad_steps: u64,
}

impl LowAgent {
    pub fn new(config: LowAgentConfig, seed: u64) -> Self {
        let net = Network::seeded(mlp_spec(), seed).expect("static spec");
        let target = net.clone();
        let opt = Adam::new(&net, config.learning_rate);
        Self {
            net,
            target,
            replay: ReplayBuffer::new(config.replay_capacity),
            config,
            opt,
            grad_steps: 0,
        }
    }

    /// Rebuild around loaded parameters, fresh optimizer and replay.
    pub fn with_network(config: LowAgentConfig, net: Network<f32>) -> Self {
        let target = net.clone();
        let opt = Adam::new(&net, config.learning_rate);
        Self {
            net,
            target,
            replay: ReplayBuffer::new(config.replay_capacity),
            config,
            opt,
            grad_steps: 0,
        }
    }

    fn featurize(&self, s: &LowState) -> Tensor<f32> {
        Tensor::from_vec(
            &[5],
            vec![
                (s.d / self.config.pos_scale) as f32,
                (s.z / self.config.pos_scale) as f32,
                s.theta_y as f32,
                (s.f_d / self.config.force_scale) as f32,
                (s.f_max / self.config.force_scale) as f32,
            ],
        )
        .expect("fixed shape")
    }

    pub fn q_values(&self, net: &Network<f32>, s: &LowState) -> Vec<f32> {
        net.forward(&self.featurize(s))
            .expect("static shapes")
            .data()
            .to_vec()
    }

    /// Epsilon-greedy over the 12 displacements; greedy ties break on the
    /// lowest index.
    pub fn select(&self, s: &LowState, epsilon: f64, rng: &mut ChaCha8Rng) -> LowLevelAction {
        if epsilon > 0.0 && rng.random_range(0.0..1.0) < epsilon {
            return LowLevelAction(rng.random_range(0..LowLevelAction::COUNT));
        }
        let q = self.q_values(&self.net, s);
        let mut best = 0;
        for (i, &v) in q.iter().enumerate() {
            if v > q[best] {
                best = i;
            }
        }
        LowLevelAction(best)
    }

    /// One masked-Huber DQN step over a replay batch; copies the target net
    /// on the configured cadence. Returns the loss, or None while the buffer
    /// is short.
    pub fn train_from_replay(&mut self, rng: &mut ChaCha8Rng) -> Result<Option<f64>, NnError> {
        if self.replay.len() < self.config.warmup.max(self.config.batch_size) {
            return Ok(None);
        }
        let Some(indices) = self.replay.sample_indices(self.config.batch_size, rng) else {
            return Ok(None);
        };
        let mut batch = Vec::with_capacity(indices.len());
        for idx in indices {
            let tr = *self.replay.get(idx);
            let target = if self.config.double_dqn && !tr.terminal {
                let online = self.q_values(&self.net, &tr.next_state);
                let mut best = 0;
                for (i, &v) in online.iter().enumerate() {
                    if v > online[best] {
                        best = i;
                    }
                }
                let frozen = self.q_values(&self.target, &tr.next_state);
                tr.reward + self.config.gamma * f64::from(frozen[best])
            } else {
                td_target_low(&tr, self, self.config.gamma)
            };
            batch.push(MaskedSample {
                input: self.featurize(&tr.state),
                targets: vec![(tr.action.0, target as f32)],
            });
        }
        let loss = train_step(&mut self.net, &batch, &mut self.opt)?;
        self.grad_steps += 1;
        if self.grad_steps.is_multiple_of(self.config.target_every) {
            update_target(&self.net, &mut self.target);
        }
        Ok(Some(loss))
    }
}

/// Standard Q-learning backup against the frozen target network.
pub fn td_target_low(tr: &LowTransition, agent: &LowAgent, gamma: f64) -> f64 {
    if tr.terminal {
        return tr.reward;
    }
    let q = agent.q_values(&agent.target, &tr.next_state);
    let max = q.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    tr.reward + gamma * f64::from(max)
}

/// Hard parameter copy; both nets then produce identical outputs.
pub fn update_target(net: &Network<f32>, target: &mut Network<f32>) {
    target.copy_params_from(net);
}
