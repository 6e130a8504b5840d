//! Run configuration: every tunable constant of the stack, a flat
//! `key = value` text format, and validation.
//!
//! Unknown keys are rejected with their line number; values must satisfy the
//! module invariants or parsing fails.

use crate::agents::{HighAgentConfig, LowAgentConfig};
use crate::training::{EnvConfig, FlipController, JointConfig, LowStageConfig};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub high: HighAgentConfig,
    pub low: LowAgentConfig,
    pub flush: LowStageConfig,
    pub jitter: LowStageConfig,
    pub joint: JointConfig,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            env: EnvConfig::default(),
            high: HighAgentConfig::default(),
            low: LowAgentConfig::default(),
            flush: LowStageConfig::flush(),
            jitter: LowStageConfig::jitter(),
            joint: JointConfig::default(),
            seed: 0,
        }
    }
}

fn parse_f64(raw: &str) -> Result<f64, String> {
    raw.parse().map_err(|_| format!("expected a number, got {raw:?}"))
}

fn parse_u64(raw: &str) -> Result<u64, String> {
    raw.parse().map_err(|_| format!("expected an integer, got {raw:?}"))
}

fn parse_usize(raw: &str) -> Result<usize, String> {
    raw.parse().map_err(|_| format!("expected an integer, got {raw:?}"))
}

fn parse_u32(raw: &str) -> Result<u32, String> {
    raw.parse().map_err(|_| format!("expected an integer, got {raw:?}"))
}

fn parse_bool(raw: &str) -> Result<bool, String> {
    match raw {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("expected a boolean, got {raw:?}")),
    }
}

impl RunConfig {
    /// Parse flat `key = value` text over the defaults. `#` starts a
    /// comment; blank lines are skipped; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Line {
                    line: idx + 1,
                    message: format!("expected `key = value`, got {line:?}"),
                });
            };
            cfg.set(key.trim(), value.trim())
                .map_err(|message| ConfigError::Line {
                    line: idx + 1,
                    message,
                })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn set(&mut self, key: &str, raw: &str) -> Result<(), String> {
        match key {
            "seed" => self.seed = parse_u64(raw)?,

            "physics.contact_stiffness" => self.env.physics.contact_stiffness = parse_f64(raw)?,
            "physics.contact_force_cap" => self.env.physics.contact_force_cap = parse_f64(raw)?,
            "physics.gravity" => self.env.physics.gravity = parse_f64(raw)?,
            "physics.substep_len" => self.env.physics.substep_len = parse_f64(raw)?,
            "physics.settle_tolerance" => self.env.physics.settle_tolerance = parse_f64(raw)?,
            "physics.ee_finger_len" => self.env.physics.ee_finger_len = parse_f64(raw)?,
            "physics.ee_contact_mu" => self.env.physics.ee_contact_mu = parse_f64(raw)?,
            "physics.push_compliance" => self.env.physics.push_compliance = parse_f64(raw)?,
            "physics.wall_contact_tol" => self.env.physics.wall_contact_tol = parse_f64(raw)?,
            "physics.pivot_align_tol" => self.env.physics.pivot_align_tol = parse_f64(raw)?,
            "physics.yaw_align_rate" => self.env.physics.yaw_align_rate = parse_f64(raw)?,

            "object.length_min" => self.env.adr.object.length.0 = parse_f64(raw)?,
            "object.length_max" => self.env.adr.object.length.1 = parse_f64(raw)?,
            "object.width_min" => self.env.adr.object.width.0 = parse_f64(raw)?,
            "object.width_max" => self.env.adr.object.width.1 = parse_f64(raw)?,
            "object.height_min" => self.env.adr.object.height.0 = parse_f64(raw)?,
            "object.height_max" => self.env.adr.object.height.1 = parse_f64(raw)?,
            "object.mass_min" => self.env.adr.object.mass.0 = parse_f64(raw)?,
            "object.mass_max" => self.env.adr.object.mass.1 = parse_f64(raw)?,
            "object.friction_min" => self.env.adr.object.friction_mu.0 = parse_f64(raw)?,
            "object.friction_max" => self.env.adr.object.friction_mu.1 = parse_f64(raw)?,

            "noise.gaussian_sigma" => self.env.adr.noise.gaussian_sigma = parse_f64(raw)?,
            "noise.dropout_regions_min" => self.env.adr.noise.dropout_regions.0 = parse_u32(raw)?,
            "noise.dropout_regions_max" => self.env.adr.noise.dropout_regions.1 = parse_u32(raw)?,
            "noise.dropout_size_min" => self.env.adr.noise.dropout_size.0 = parse_u32(raw)?,
            "noise.dropout_size_max" => self.env.adr.noise.dropout_size.1 = parse_u32(raw)?,

            "perception.mask_height_threshold" => {
                self.env.perception.mask.height_threshold = parse_f64(raw)?;
                self.high.mask.height_threshold = self.env.perception.mask.height_threshold;
            }
            "perception.mask_dilation_radius" => {
                self.env.perception.mask.dilation_radius = parse_u32(raw)?;
                self.high.mask.dilation_radius = self.env.perception.mask.dilation_radius;
            }
            "perception.start_clearance" => self.env.perception.start_clearance = parse_f64(raw)?,

            "check.wall_proximity" => self.env.primitive.check.wall_proximity = parse_f64(raw)?,
            "check.change_pos" => self.env.primitive.check.change_pos = parse_f64(raw)?,
            "check.change_yaw_deg" => {
                self.env.primitive.check.change_yaw = parse_f64(raw)?.to_radians()
            }
            "check.grasp_min_height" => {
                self.env.primitive.check.grasp_min_height = parse_f64(raw)?
            }

            "reward.sigma" => self.env.primitive.reward.sigma = parse_f64(raw)?,
            "reward.w" => self.env.primitive.reward.w = parse_f64(raw)?,
            "reward.f_limit" => self.env.primitive.reward.f_limit = parse_f64(raw)?,
            "reward.push_wall" => self.env.primitive.reward.r_push_wall = parse_f64(raw)?,
            "reward.push_change" => self.env.primitive.reward.r_push_change = parse_f64(raw)?,
            "reward.flip" => self.env.primitive.reward.r_flip = parse_f64(raw)?,
            "reward.grasp" => self.env.primitive.reward.r_grasp = parse_f64(raw)?,

            "exec.push_stroke" => self.env.primitive.exec.push_stroke = parse_f64(raw)?,
            "exec.grasp_lift" => self.env.primitive.exec.grasp_lift = parse_f64(raw)?,
            "exec.grasp_depth" => self.env.primitive.exec.grasp_depth = parse_f64(raw)?,
            "exec.rim_height" => self.env.primitive.exec.rim_height = parse_f64(raw)?,
            "exec.grasp_center_tol" => self.env.primitive.exec.grasp_center_tol = parse_f64(raw)?,
            "exec.grasp_dim_tol" => self.env.primitive.exec.grasp_dim_tol = parse_f64(raw)?,
            "exec.horizon" => self.env.primitive.exec.horizon = parse_usize(raw)?,
            "exec.stall_press_steps" => {
                self.env.primitive.exec.stall_press_steps = parse_usize(raw)?
            }
            "exec.stall_pitch_steps" => {
                self.env.primitive.exec.stall_pitch_steps = parse_usize(raw)?
            }

            "low_action.a_d" => {
                self.env.primitive.exec.low_action.a_d = parse_f64(raw)?;
                self.low.action.a_d = self.env.primitive.exec.low_action.a_d;
            }
            "low_action.a_z" => {
                self.env.primitive.exec.low_action.a_z = parse_f64(raw)?;
                self.low.action.a_z = self.env.primitive.exec.low_action.a_z;
            }
            "low_action.r_y_deg" => {
                self.env.primitive.exec.low_action.r_y = parse_f64(raw)?.to_radians();
                self.low.action.r_y = self.env.primitive.exec.low_action.r_y;
            }

            "manual_flip.force_low" => self.env.primitive.manual.force_low = parse_f64(raw)?,
            "manual_flip.force_high" => self.env.primitive.manual.force_high = parse_f64(raw)?,
            "manual_flip.stage2_pitch_deg" => {
                self.env.primitive.manual.stage2_pitch = parse_f64(raw)?.to_radians()
            }

            "ee.max_opening" => self.env.max_opening = parse_f64(raw)?,

            "episode.max_primitives" => self.env.max_primitives = parse_usize(raw)?,
            "episode.flip_controller" => {
                self.env.flip_controller = match raw {
                    "learned" => FlipController::Learned,
                    "manual" => FlipController::Manual,
                    _ => return Err(format!("expected learned|manual, got {raw:?}")),
                }
            }
            "episode.train_low_in_joint" => self.env.train_low_in_joint = parse_bool(raw)?,
            "episode.high_train_every" => self.env.high_train_every = parse_usize(raw)?,

            "high.gamma" => self.high.gamma = parse_f64(raw)?,
            "high.learning_rate" => self.high.learning_rate = parse_f64(raw)?,
            "high.batch_size" => self.high.batch_size = parse_usize(raw)?,
            "high.replay_capacity" => self.high.replay_capacity = parse_usize(raw)?,
            "high.target_every" => self.high.target_every = parse_u64(raw)?,

            "low.gamma" => self.low.gamma = parse_f64(raw)?,
            "low.learning_rate" => self.low.learning_rate = parse_f64(raw)?,
            "low.batch_size" => self.low.batch_size = parse_usize(raw)?,
            "low.replay_capacity" => self.low.replay_capacity = parse_usize(raw)?,
            "low.target_every" => self.low.target_every = parse_u64(raw)?,
            "low.warmup" => self.low.warmup = parse_usize(raw)?,
            "low.double_dqn" => self.low.double_dqn = parse_bool(raw)?,
            "low.pos_scale" => self.low.pos_scale = parse_f64(raw)?,
            "low.force_scale" => self.low.force_scale = parse_f64(raw)?,

            "stage.flush.episodes" => self.flush.episodes = parse_u64(raw)?,
            "stage.flush.gate" => self.flush.gate = parse_f64(raw)?,
            "stage.flush.min_episodes" => self.flush.min_episodes = parse_u64(raw)?,
            "stage.flush.pos_jitter" => self.flush.pos_jitter = parse_f64(raw)?,
            "stage.flush.yaw_jitter_deg" => self.flush.yaw_jitter = parse_f64(raw)?.to_radians(),
            "stage.flush.epsilon_decay_episodes" => {
                self.flush.epsilon_decay_episodes = parse_u64(raw)?
            }

            "stage.jitter.episodes" => self.jitter.episodes = parse_u64(raw)?,
            "stage.jitter.gate" => self.jitter.gate = parse_f64(raw)?,
            "stage.jitter.min_episodes" => self.jitter.min_episodes = parse_u64(raw)?,
            "stage.jitter.pos_jitter" => self.jitter.pos_jitter = parse_f64(raw)?,
            "stage.jitter.yaw_jitter_deg" => self.jitter.yaw_jitter = parse_f64(raw)?.to_radians(),
            "stage.jitter.epsilon_decay_episodes" => {
                self.jitter.epsilon_decay_episodes = parse_u64(raw)?
            }

            "joint.episodes" => self.joint.episodes = parse_u64(raw)?,
            "joint.epsilon_decay_episodes" => self.joint.epsilon_decay_episodes = parse_u64(raw)?,
            "joint.stop_at_completion" => {
                self.joint.stop_at_completion = if raw == "none" {
                    None
                } else {
                    Some(parse_f64(raw)?)
                }
            }
            "joint.checkpoint_every" => self.joint.checkpoint_every = parse_u64(raw)?,

            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Every key with its resolved value and a short description.
    pub fn entries(&self) -> Vec<(&'static str, String, &'static str)> {
        let c = self;
        let deg = |r: f64| format!("{}", r.to_degrees());
        let opt = |v: Option<f64>| v.map_or_else(|| "none".into(), |x| format!("{x}"));
        vec![
            ("seed", c.seed.to_string(), "master random seed"),
            ("physics.contact_stiffness", c.env.physics.contact_stiffness.to_string(), "penalty spring, N/m"),
            ("physics.contact_force_cap", c.env.physics.contact_force_cap.to_string(), "max reported contact force, N"),
            ("physics.gravity", c.env.physics.gravity.to_string(), "gravity, m/s^2"),
            ("physics.substep_len", c.env.physics.substep_len.to_string(), "max end-effector motion per substep, m"),
            ("physics.settle_tolerance", c.env.physics.settle_tolerance.to_string(), "settle decision tolerance, rad"),
            ("physics.ee_finger_len", c.env.physics.ee_finger_len.to_string(), "closed-finger tool length, m"),
            ("physics.ee_contact_mu", c.env.physics.ee_contact_mu.to_string(), "fingertip-object friction"),
            ("physics.push_compliance", c.env.physics.push_compliance.to_string(), "fraction of pinned-contact rotation while pushing"),
            ("physics.wall_contact_tol", c.env.physics.wall_contact_tol.to_string(), "gap treated as wall contact, m"),
            ("physics.pivot_align_tol", c.env.physics.pivot_align_tol.to_string(), "max axis-to-wall misalignment for a pivot, rad"),
            ("physics.yaw_align_rate", c.env.physics.yaw_align_rate.to_string(), "yaw relaxation per blocked slide, rad/m"),
            ("object.length_min", c.env.adr.object.length.0.to_string(), "object length range low, m"),
            ("object.length_max", c.env.adr.object.length.1.to_string(), "object length range high, m"),
            ("object.width_min", c.env.adr.object.width.0.to_string(), "object width range low, m"),
            ("object.width_max", c.env.adr.object.width.1.to_string(), "object width range high, m"),
            ("object.height_min", c.env.adr.object.height.0.to_string(), "object height range low, m"),
            ("object.height_max", c.env.adr.object.height.1.to_string(), "object height range high, m"),
            ("object.mass_min", c.env.adr.object.mass.0.to_string(), "object mass range low, kg"),
            ("object.mass_max", c.env.adr.object.mass.1.to_string(), "object mass range high, kg"),
            ("object.friction_min", c.env.adr.object.friction_mu.0.to_string(), "floor friction range low"),
            ("object.friction_max", c.env.adr.object.friction_mu.1.to_string(), "floor friction range high"),
            ("noise.gaussian_sigma", c.env.adr.noise.gaussian_sigma.to_string(), "height-map noise std, m"),
            ("noise.dropout_regions_min", c.env.adr.noise.dropout_regions.0.to_string(), "dropout rectangles, low"),
            ("noise.dropout_regions_max", c.env.adr.noise.dropout_regions.1.to_string(), "dropout rectangles, high"),
            ("noise.dropout_size_min", c.env.adr.noise.dropout_size.0.to_string(), "dropout side, px low"),
            ("noise.dropout_size_max", c.env.adr.noise.dropout_size.1.to_string(), "dropout side, px high"),
            ("perception.mask_height_threshold", c.env.perception.mask.height_threshold.to_string(), "object pixel threshold M_h, m"),
            ("perception.mask_dilation_radius", c.env.perception.mask.dilation_radius.to_string(), "band dilation radius, px"),
            ("perception.start_clearance", c.env.perception.start_clearance.to_string(), "start-pose height above the map, m"),
            ("check.wall_proximity", c.env.primitive.check.wall_proximity.to_string(), "near-wall distance, m"),
            ("check.change_pos", c.env.primitive.check.change_pos.to_string(), "pose-change translation threshold, m"),
            ("check.change_yaw_deg", deg(c.env.primitive.check.change_yaw), "pose-change rotation threshold, deg"),
            ("check.grasp_min_height", c.env.primitive.check.grasp_min_height.to_string(), "lifted-bottom height for grasp success, m"),
            ("reward.sigma", c.env.primitive.reward.sigma.to_string(), "shaped reward cap"),
            ("reward.w", c.env.primitive.reward.w.to_string(), "shaped reward height normalizer, m"),
            ("reward.f_limit", c.env.primitive.reward.f_limit.to_string(), "safety contact force, N"),
            ("reward.push_wall", c.env.primitive.reward.r_push_wall.to_string(), "push-to-wall reward"),
            ("reward.push_change", c.env.primitive.reward.r_push_change.to_string(), "workspace-change reward"),
            ("reward.flip", c.env.primitive.reward.r_flip.to_string(), "flip success reward"),
            ("reward.grasp", c.env.primitive.reward.r_grasp.to_string(), "grasp success reward"),
            ("exec.push_stroke", c.env.primitive.exec.push_stroke.to_string(), "push translation, m"),
            ("exec.grasp_lift", c.env.primitive.exec.grasp_lift.to_string(), "grasp lift height, m"),
            ("exec.grasp_depth", c.env.primitive.exec.grasp_depth.to_string(), "fingertip depth below object top, m"),
            ("exec.rim_height", c.env.primitive.exec.rim_height.to_string(), "wall rim height for descent clearance, m"),
            ("exec.grasp_center_tol", c.env.primitive.exec.grasp_center_tol.to_string(), "grasp line to center tolerance, m"),
            ("exec.grasp_dim_tol", c.env.primitive.exec.grasp_dim_tol.to_string(), "caliper-to-dimension match tolerance, m"),
            ("exec.horizon", c.env.primitive.exec.horizon.to_string(), "low-level horizon T, steps"),
            ("exec.stall_press_steps", c.env.primitive.exec.stall_press_steps.to_string(), "contact steps without pitch before cutoff"),
            ("exec.stall_pitch_steps", c.env.primitive.exec.stall_pitch_steps.to_string(), "pitch-stagnant steps before cutoff"),
            ("low_action.a_d", c.env.primitive.exec.low_action.a_d.to_string(), "forward step, m"),
            ("low_action.a_z", c.env.primitive.exec.low_action.a_z.to_string(), "vertical step, m"),
            ("low_action.r_y_deg", deg(c.env.primitive.exec.low_action.r_y), "tool tilt step, deg"),
            ("manual_flip.force_low", c.env.primitive.manual.force_low.to_string(), "manual flip band low, N"),
            ("manual_flip.force_high", c.env.primitive.manual.force_high.to_string(), "manual flip band high, N"),
            ("manual_flip.stage2_pitch_deg", deg(c.env.primitive.manual.stage2_pitch), "manual flip stage-3 handover pitch, deg"),
            ("ee.max_opening", c.env.max_opening.to_string(), "max finger separation, m"),
            ("episode.max_primitives", c.env.max_primitives.to_string(), "primitive budget per episode"),
            ("episode.flip_controller", match c.env.flip_controller { FlipController::Learned => "learned".into(), FlipController::Manual => "manual".into() }, "learned|manual flip"),
            ("episode.train_low_in_joint", c.env.train_low_in_joint.to_string(), "keep training the low agent jointly"),
            ("episode.high_train_every", c.env.high_train_every.to_string(), "high-level gradient cadence, primitives"),
            ("high.gamma", c.high.gamma.to_string(), "high-level discount"),
            ("high.learning_rate", c.high.learning_rate.to_string(), "high-level Adam learning rate"),
            ("high.batch_size", c.high.batch_size.to_string(), "high-level batch size"),
            ("high.replay_capacity", c.high.replay_capacity.to_string(), "high-level replay capacity"),
            ("high.target_every", c.high.target_every.to_string(), "high-level target copy cadence, steps"),
            ("low.gamma", c.low.gamma.to_string(), "low-level discount"),
            ("low.learning_rate", c.low.learning_rate.to_string(), "low-level Adam learning rate"),
            ("low.batch_size", c.low.batch_size.to_string(), "low-level batch size"),
            ("low.replay_capacity", c.low.replay_capacity.to_string(), "low-level replay capacity"),
            ("low.target_every", c.low.target_every.to_string(), "low-level target copy cadence, steps"),
            ("low.warmup", c.low.warmup.to_string(), "replay warmup before training, transitions"),
            ("low.double_dqn", c.low.double_dqn.to_string(), "double-DQN backup for the low agent"),
            ("low.pos_scale", c.low.pos_scale.to_string(), "position feature scale, m"),
            ("low.force_scale", c.low.force_scale.to_string(), "force feature scale, N"),
            ("stage.flush.episodes", c.flush.episodes.to_string(), "flush stage budget, episodes"),
            ("stage.flush.gate", c.flush.gate.to_string(), "flush stage trailing gate"),
            ("stage.flush.min_episodes", c.flush.min_episodes.to_string(), "episodes before the flush gate applies"),
            ("stage.flush.pos_jitter", c.flush.pos_jitter.to_string(), "flush start jitter, m"),
            ("stage.flush.yaw_jitter_deg", deg(c.flush.yaw_jitter), "flush yaw jitter, deg"),
            ("stage.flush.epsilon_decay_episodes", c.flush.epsilon_decay_episodes.to_string(), "flush epsilon decay, episodes"),
            ("stage.jitter.episodes", c.jitter.episodes.to_string(), "jitter stage budget, episodes"),
            ("stage.jitter.gate", c.jitter.gate.to_string(), "jitter stage trailing gate"),
            ("stage.jitter.min_episodes", c.jitter.min_episodes.to_string(), "episodes before the jitter gate applies"),
            ("stage.jitter.pos_jitter", c.jitter.pos_jitter.to_string(), "jitter start jitter, m"),
            ("stage.jitter.yaw_jitter_deg", deg(c.jitter.yaw_jitter), "jitter yaw jitter, deg"),
            ("stage.jitter.epsilon_decay_episodes", c.jitter.epsilon_decay_episodes.to_string(), "jitter epsilon decay, episodes"),
            ("joint.episodes", c.joint.episodes.to_string(), "joint training budget, episodes"),
            ("joint.epsilon_decay_episodes", c.joint.epsilon_decay_episodes.to_string(), "joint epsilon decay, episodes"),
            ("joint.stop_at_completion", opt(c.joint.stop_at_completion), "early-stop trailing completion, or none"),
            ("joint.checkpoint_every", c.joint.checkpoint_every.to_string(), "rollback checkpoint cadence, episodes"),
        ]
    }

    /// Resolved values as parseable text, one key per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, value, _) in self.entries() {
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }

    /// Markdown reference of every key with its default and description.
    pub fn reference() -> String {
        let defaults = Self::default();
        let mut out = String::from("# Configuration reference\n\nFlat `key = value` lines; `#` comments.\n\n| key | default | description |\n|---|---|---|\n");
        for (key, value, doc) in defaults.entries() {
            out.push_str(&format!("| `{key}` | `{value}` | {doc} |\n"));
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| ConfigError::Invalid(m);
        self.env
            .physics
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        self.env.adr.validate().map_err(invalid)?;
        if self.env.primitive.reward.f_limit >= self.env.physics.contact_force_cap {
            return Err(invalid(format!(
                "reward.f_limit ({}) must stay below physics.contact_force_cap ({})",
                self.env.primitive.reward.f_limit, self.env.physics.contact_force_cap
            )));
        }
        if self.env.primitive.reward.sigma <= 0.0 || self.env.primitive.reward.w <= 0.0 {
            return Err(invalid("reward.sigma and reward.w must be positive".into()));
        }
        if self.env.max_primitives == 0 || self.env.primitive.exec.horizon == 0 {
            return Err(invalid(
                "episode.max_primitives and exec.horizon must be positive".into(),
            ));
        }
        for (name, gate) in [("flush", self.flush.gate), ("jitter", self.jitter.gate)] {
            if !(gate > 0.0 && gate <= 1.0) {
                return Err(invalid(format!("stage.{name}.gate must lie in (0, 1]")));
            }
        }
        if self.jitter.pos_jitter <= self.flush.pos_jitter
            || self.jitter.yaw_jitter < self.flush.yaw_jitter
        {
            return Err(invalid(
                "curriculum difficulty must increase: jitter stage jitters must exceed flush".into(),
            ));
        }
        if self.env.max_opening <= 0.0 {
            return Err(invalid("ee.max_opening must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn text_round_trips_every_key() {
        let cfg = RunConfig::default();
        let text = cfg.to_text();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn unknown_keys_are_line_anchored_errors() {
        let err = RunConfig::parse("seed = 3\nbogus.key = 1\n").unwrap_err();
        match err {
            ConfigError::Line { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("bogus.key"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = RunConfig::parse("# a comment\n\nseed = 9 # trailing\n").unwrap();
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn invariant_violations_are_rejected() {
        assert!(RunConfig::parse("reward.f_limit = 60\n").is_err());
        assert!(RunConfig::parse("physics.gravity = -1\n").is_err());
        assert!(RunConfig::parse("object.length_min = 0.3\nobject.length_max = 0.2\n").is_err());
    }

    #[test]
    fn reference_covers_every_parsed_key() {
        let reference = RunConfig::reference();
        for (key, _, _) in RunConfig::default().entries() {
            assert!(reference.contains(key));
        }
    }
}
