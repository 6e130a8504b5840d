//! The high-level primitive selector: a fully convolutional network scoring
//! every (pixel, rotation, primitive) triple of the observation stack.
//!
//! The network input has two channels: the rotated height map and the
//! rotated wall-distance field. Walls never show up in the height map, yet
//! flip and push values hinge on where the nearest wall lies, so the
//! distance field supplies that context to an otherwise translation-
//! equivariant model.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{train_step, Adam, LayerSpec, MaskedSample, Network, NetworkSpec, NnError, Tensor};
use crate::perception::{
    compute_masks_from_stack, rotate_map, rotate_stack, wall_distance_map, HeightMap,
    HeightMapStack, MaskParams, MaskSet, GRID, K_ROTATIONS,
};

use super::actions::{HighLevelAction, Primitive};
use super::replay::ReplayBuffer;

/// Height feature scale: tallest standing objects approach 1.
const HEIGHT_SCALE: f32 = 8.0;
/// Wall-distance feature scale: half the workspace side maps to 1.
const WALL_SCALE: f32 = 1.0 / 0.224;

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("no admissible action: every Q-map entry is masked")]
    NoAdmissibleAction,
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// Pixel-wise values for every rotation and primitive, laid out
/// [rotation][primitive][y][x].
pub struct QMapSet {
    values: Vec<f32>,
}

impl QMapSet {
    pub const ENTRIES: usize = K_ROTATIONS * Primitive::COUNT * GRID * GRID;

    pub fn from_values(values: Vec<f32>) -> Self {
        assert_eq!(values.len(), Self::ENTRIES);
        Self { values }
    }

    pub fn flat_index(i: usize, phi: Primitive, y: usize, x: usize) -> usize {
        ((i * Primitive::COUNT + phi.index()) * GRID + y) * GRID + x
    }

    pub fn value(&self, i: usize, phi: Primitive, y: usize, x: usize) -> f32 {
        self.values[Self::flat_index(i, phi, y, x)]
    }

    /// One primitive's 64 x 64 plane of rotation `i`.
    pub fn plane(&self, i: usize, phi: Primitive) -> &[f32] {
        let base = (i * Primitive::COUNT + phi.index()) * GRID * GRID;
        &self.values[base..base + GRID * GRID]
    }
}

/// Top-10 (value, flat index) unmasked entries of the given primitives,
/// best first; ties keep the earlier flat index.
fn top_ten(qmaps: &QMapSet, masks: &MaskSet, primitives: &[Primitive]) -> Vec<(f32, usize)> {
    let mut top: Vec<(f32, usize)> = Vec::with_capacity(11);
    for i in 0..K_ROTATIONS {
        for &phi in primitives {
            let mask = masks.mask(i, phi.mask_channel());
            let plane = qmaps.plane(i, phi);
            let base = QMapSet::flat_index(i, phi, 0, 0);
            for (p, (&q, &ok)) in plane.iter().zip(mask).enumerate() {
                if !ok {
                    continue;
                }
                let pos = top.partition_point(|&(tv, _)| tv >= q);
                if pos < 10 {
                    top.insert(pos, (q, base + p));
                    top.truncate(10);
                }
            }
        }
    }
    top
}

fn unflatten(flat: usize) -> HighLevelAction {
    let x = flat % GRID;
    let y = (flat / GRID) % GRID;
    let phi = Primitive::from_index((flat / (GRID * GRID)) % Primitive::COUNT);
    let i = flat / (GRID * GRID * Primitive::COUNT);
    HighLevelAction { x, y, i, phi }
}

/// Greedy action over unmasked entries; with probability epsilon, a uniform
/// draw among the ten highest-valued unmasked entries of one uniformly drawn
/// primitive's Q maps. A fresh network ranks one primitive map above the
/// others everywhere, so exploring the global top ten would never try the
/// other two primitives at all. Ties break on the lowest flat index.
pub fn select_high_action(
    qmaps: &QMapSet,
    masks: &MaskSet,
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<HighLevelAction, AgentError> {
    let explore = epsilon > 0.0 && rng.random_range(0.0..1.0) < epsilon;
    if explore {
        let phi = Primitive::ALL[rng.random_range(0..Primitive::COUNT)];
        let top = top_ten(qmaps, masks, &[phi]);
        if !top.is_empty() {
            return Ok(unflatten(top[rng.random_range(0..top.len())].1));
        }
        // Fall through when the drawn primitive is fully masked.
    }
    let top = top_ten(qmaps, masks, &Primitive::ALL);
    if top.is_empty() {
        return Err(AgentError::NoAdmissibleAction);
    }
    let flat = if explore {
        top[rng.random_range(0..top.len())].1
    } else {
        top[0].1
    };
    Ok(unflatten(flat))
}

/// Image-based replay record. Observations are stored unrotated; training
/// rotates the acted frame on demand.
#[derive(Debug, Clone)]
pub struct HighTransition {
    pub obs: HeightMap,
    pub action: HighLevelAction,
    pub reward: f64,
    pub next_obs: HeightMap,
    pub terminal: bool,
}

/// Replay entry: the transition plus a cached next-state value keyed by the
/// target-net version. Resampling a transition between target copies reuses
/// the expensive 16-rotation evaluation; the cached number is identical to a
/// fresh one, so training trajectories do not change.
#[derive(Debug, Clone)]
pub struct HighReplayEntry {
    pub tr: HighTransition,
    cached_next_value: Option<(u64, Option<f64>)>,
}

impl HighReplayEntry {
    pub fn new(tr: HighTransition) -> Self {
        Self {
            tr,
            cached_next_value: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HighAgentConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Hard target copy cadence, gradient steps.
    pub target_every: u64,
    pub mask: MaskParams,
}

impl Default for HighAgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            learning_rate: 1e-4,
            batch_size: 8,
            replay_capacity: 2000,
            target_every: 20,
            mask: MaskParams::default(),
        }
    }
}

/// Encoder-decoder FCN: 2 x 64 x 64 in, one 64 x 64 Q plane per primitive
/// out. Three stride-2 stages push the receptive field past 40 px so a
/// pixel's value can see both the object and the wall it would pivot on.
pub fn fcn_spec() -> NetworkSpec {
    let conv = |in_ch, out_ch, kernel, stride, pad| LayerSpec::Conv2d {
        in_ch,
        out_ch,
        kernel,
        stride,
        pad,
    };
    NetworkSpec::new(
        &[2, GRID, GRID],
        vec![
            conv(2, 8, 3, 1, 1),
            LayerSpec::Relu,
            conv(8, 16, 3, 2, 1),
            LayerSpec::Relu,
            conv(16, 24, 3, 2, 1),
            LayerSpec::Relu,
            conv(24, 24, 3, 2, 1),
            LayerSpec::Relu,
            conv(24, 24, 3, 1, 1),
            LayerSpec::Relu,
            LayerSpec::Upsample { factor: 2 },
            conv(24, 16, 3, 1, 1),
            LayerSpec::Relu,
            LayerSpec::Upsample { factor: 2 },
            conv(16, 8, 3, 1, 1),
            LayerSpec::Relu,
            LayerSpec::Upsample { factor: 2 },
            conv(8, Primitive::COUNT, 1, 1, 0),
        ],
    )
    .expect("static spec")
}

pub struct HighAgent {
    pub net: Network<f32>,
    pub target: Network<f32>,
    pub replay: ReplayBuffer<HighReplayEntry>,
    pub config: HighAgentConfig,
    opt: Adam<f32>,
    grad_steps: u64,
    target_version: u64,
    /// Rotated wall-distance channel, fixed scene geometry.
    wall_channels: Vec<Vec<f32>>,
}

impl HighAgent {
    pub fn new(config: HighAgentConfig, seed: u64) -> Self {
        let net = Network::seeded(fcn_spec(), seed).expect("static spec");
        Self::assemble(config, net)
    }

    pub fn with_network(config: HighAgentConfig, net: Network<f32>) -> Self {
        Self::assemble(config, net)
    }

    fn assemble(config: HighAgentConfig, net: Network<f32>) -> Self {
        let wall = wall_distance_map();
        let wall_channels = (0..K_ROTATIONS)
            .map(|i| {
                rotate_map(&wall, i)
                    .data()
                    .iter()
                    .map(|&v| v * WALL_SCALE)
                    .collect()
            })
            .collect();
        let target = net.clone();
        let opt = Adam::new(&net, config.learning_rate);
        Self {
            net,
            target,
            replay: ReplayBuffer::new(config.replay_capacity),
            config,
            opt,
            grad_steps: 0,
            target_version: 0,
            wall_channels,
        }
    }

    pub fn push_transition(&mut self, tr: HighTransition) {
        self.replay.push(HighReplayEntry::new(tr));
    }

    /// Two-channel network input for one rotated frame.
    fn input_for(&self, rotated: &HeightMap, i: usize) -> Tensor<f32> {
        let mut data = Vec::with_capacity(2 * GRID * GRID);
        data.extend(rotated.data().iter().map(|&v| v * HEIGHT_SCALE));
        data.extend_from_slice(&self.wall_channels[i]);
        Tensor::from_vec(&[2, GRID, GRID], data).expect("fixed shape")
    }

    /// Q maps for a full observation stack.
    pub fn q_maps(&self, net: &Network<f32>, stack: &HeightMapStack) -> Result<QMapSet, NnError> {
        let mut values = Vec::with_capacity(QMapSet::ENTRIES);
        for (i, map) in stack.maps.iter().enumerate() {
            let out = net.forward(&self.input_for(map, i))?;
            values.extend_from_slice(out.data());
        }
        Ok(QMapSet::from_values(values))
    }

    /// Highest unmasked target-net value over the next observation, or None
    /// when everything is masked (treated as terminal by the backup).
    fn next_state_value(&self, next_obs: &HeightMap) -> Result<Option<f64>, NnError> {
        let stack = rotate_stack(next_obs);
        let masks = compute_masks_from_stack(&stack, &self.config.mask);
        let q = self.q_maps(&self.target, &stack)?;
        let mut best: Option<f32> = None;
        for i in 0..K_ROTATIONS {
            for phi in Primitive::ALL {
                let mask = masks.mask(i, phi.mask_channel());
                for (p, &v) in q.plane(i, phi).iter().enumerate() {
                    if mask[p] && best.is_none_or(|b| v > b) {
                        best = Some(v);
                    }
                }
            }
        }
        Ok(best.map(f64::from))
    }

    /// One masked-Huber DQN step over a replay batch. The loss touches only
    /// the acted (x, y, i, phi) entry of each sample.
    pub fn train_from_replay(&mut self, rng: &mut ChaCha8Rng) -> Result<Option<f64>, AgentError> {
        let Some(indices) = self.replay.sample_indices(self.config.batch_size, rng) else {
            return Ok(None);
        };
        let mut batch = Vec::with_capacity(indices.len());
        for idx in indices {
            let (terminal, reward, action, cached) = {
                let e = self.replay.get(idx);
                (e.tr.terminal, e.tr.reward, e.tr.action, e.cached_next_value)
            };
            let target = if terminal {
                reward
            } else {
                let next = match cached.filter(|(v, _)| *v == self.target_version) {
                    Some((_, v)) => v,
                    None => {
                        let next_obs = self.replay.get(idx).tr.next_obs.clone();
                        let v = self.next_state_value(&next_obs)?;
                        self.replay.get_mut(idx).cached_next_value =
                            Some((self.target_version, v));
                        v
                    }
                };
                match next {
                    Some(v) => reward + self.config.gamma * v,
                    None => reward,
                }
            };
            let input = {
                let tr = &self.replay.get(idx).tr;
                let rotated = rotate_map(&tr.obs, tr.action.i);
                self.input_for(&rotated, tr.action.i)
            };
            let out_idx = (action.phi.index() * GRID + action.y) * GRID + action.x;
            batch.push(MaskedSample {
                input,
                targets: vec![(out_idx, target as f32)],
            });
        }
        let loss = train_step(&mut self.net, &batch, &mut self.opt)?;
        self.grad_steps += 1;
        if self.grad_steps.is_multiple_of(self.config.target_every) {
            super::low::update_target(&self.net, &mut self.target);
            self.target_version += 1;
        }
        Ok(Some(loss))
    }
}

/// Q-learning backup for the image-based agent: r plus the discounted best
/// unmasked target-net value of the next observation.
pub fn td_target_high(
    tr: &HighTransition,
    agent: &HighAgent,
    gamma: f64,
) -> Result<f64, AgentError> {
    if tr.terminal {
        return Ok(tr.reward);
    }
    match agent.next_state_value(&tr.next_obs)? {
        Some(v) => Ok(tr.reward + gamma * v),
        None => Ok(tr.reward),
    }
}
