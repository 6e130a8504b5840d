//! The learned flip: a low-level DQN rollout over at most T displacement
//! actions, emitting replay transitions.

use rand_chacha::ChaCha8Rng;

use crate::agents::{project_low_state, LowAgent, LowTransition, Primitive};
use crate::perception::StartPose;
use crate::sim::{
    check_flip_success, home_pose, settle, ContactReading, EeDisplacement, EePose, Gripper,
    Simulator,
};

use super::{low_reward, OutcomeResult, PrimitiveCtx, PrimitiveOutcome};

/// Roll the low-level policy out from `start`. Early-terminates on flip
/// success (checked on a settled copy each step) or on a force-limit
/// violation. Exactly min(T, termination step) transitions are emitted; the
/// sum of their rewards is the episode return.
pub fn exec_flip_learned(
    sim: &mut Simulator,
    start: &StartPose,
    agent: &LowAgent,
    epsilon: f64,
    rng: &mut ChaCha8Rng,
    ctx: &PrimitiveCtx,
) -> PrimitiveOutcome {
    let before = sim.state.clone();
    sim.state.ee.gripper = Gripper::Closed;
    sim.teleport_ee(EePose {
        x: start.x,
        y: start.y,
        z: start.z,
        yaw: start.yaw,
        pitch_y: 0.0,
    });
    sim.set_forward_axis(start.yaw);

    let mut transitions = Vec::new();
    let mut result = OutcomeResult::FlipFail;
    let mut f_max_running = 0.0f64;
    let mut state = project_low_state(&sim.state.ee, start, &ContactReading::default());
    let (dir_x, dir_y) = (start.yaw.cos(), start.yaw.sin());
    let mut stalled_in_contact = 0usize;
    let mut stalled_in_pitch = 0usize;
    let mut last_pitch = sim.state.object.pitch;

    for tau in 1..=ctx.exec.horizon {
        let action = agent.select(&state, epsilon, rng);
        let (d, z, theta_y) = action.decode(&ctx.exec.low_action);
        let reading = sim.step_ee(EeDisplacement {
            dx: d * dir_x,
            dy: d * dir_y,
            dz: z,
            dyaw: 0.0,
            dpitch_y: theta_y,
        });
        f_max_running = f_max_running.max(reading.f_max);

        let mut probe = sim.state.clone();
        settle(&sim.params, &mut probe);
        let flipped_now = check_flip_success(&before, &probe);

        let running = ContactReading {
            f_d: reading.f_d,
            f_max: f_max_running,
            f_current: reading.f_current,
        };
        let next_state = project_low_state(&sim.state.ee, start, &running);
        // The safety check reads the step's peak force.
        let force_abort = reading.f_max > ctx.reward.f_limit;

        // Stall cutoff: shaped contact reward must not be farmable by
        // holding a press that makes no pitch progress.
        let pitch = sim.state.object.pitch;
        if pitch > last_pitch + 1e-9 {
            stalled_in_pitch = 0;
            stalled_in_contact = 0;
        } else if pitch > 0.0 || sim.state.object.resting_face != before.object.resting_face {
            stalled_in_pitch += 1;
        } else if reading.f_current > 0.0 {
            stalled_in_contact += 1;
        }
        last_pitch = pitch;
        let stalled = stalled_in_contact >= ctx.exec.stall_press_steps
            || stalled_in_pitch >= ctx.exec.stall_pitch_steps;

        let reward = low_reward(reading.f_max, next_state.z, flipped_now, &ctx.reward);
        let terminal = flipped_now || force_abort || stalled || tau == ctx.exec.horizon;
        transitions.push(LowTransition {
            state,
            action,
            reward,
            next_state,
            terminal,
        });
        state = next_state;
        if flipped_now {
            result = OutcomeResult::FlipSuccess;
            break;
        }
        if force_abort {
            result = OutcomeResult::ForceAbort;
            break;
        }
        if stalled {
            break;
        }
    }

    sim.teleport_ee(home_pose());
    settle(&sim.params, &mut sim.state);
    if result != OutcomeResult::ForceAbort {
        result = if check_flip_success(&before, &sim.state) {
            OutcomeResult::FlipSuccess
        } else {
            OutcomeResult::FlipFail
        };
    }
    PrimitiveOutcome {
        kind: Primitive::Flip,
        result,
        before,
        after: sim.state.clone(),
        low_transitions: transitions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{LowAgentConfig, LowLevelAction};
    use crate::rng::{rng_for, stream};
    use crate::sim::test_support::wall_flush_box;
    use crate::sim::{PhysicsParams, RestingFace, WallId};

    fn flip_start(sim: &Simulator) -> StartPose {
        // Behind the west face of the east-wall-flush object.
        let obj = sim.state.object;
        StartPose {
            x: obj.pose.x - obj.dims.width / 2.0 - 0.002,
            y: obj.pose.y,
            z: 0.015,
            yaw: 0.0,
        }
    }

    /// Deterministic scripted agent: forward+up each step, leaning forward.
    fn scripted_diag() -> LowAgent {
        // A zeroed net ties at Q=0 everywhere; break the tie toward the
        // diagonal action by biasing its output unit.
        let mut agent = LowAgent::new(LowAgentConfig::default(), 0);
        agent.net = crate::nn::Network::zeroed(crate::agents::mlp_spec()).unwrap();
        let diag = LowLevelAction::encode(true, true, 0).0;
        let n = agent.net.params().len();
        agent.net.params_mut()[n - 1][1].data_mut()[diag] = 1.0;
        agent
    }

    /// Scripted agent that only rises, never touching the object.
    fn scripted_up() -> LowAgent {
        let mut agent = LowAgent::new(LowAgentConfig::default(), 0);
        agent.net = crate::nn::Network::zeroed(crate::agents::mlp_spec()).unwrap();
        let up = LowLevelAction::encode(false, true, 0).0;
        let n = agent.net.params().len();
        agent.net.params_mut()[n - 1][1].data_mut()[up] = 1.0;
        agent
    }

    /// Scripted agent that only rams forward.
    fn scripted_ram() -> LowAgent {
        let mut agent = LowAgent::new(LowAgentConfig::default(), 0);
        agent.net = crate::nn::Network::zeroed(crate::agents::mlp_spec()).unwrap();
        let fwd = LowLevelAction::encode(true, false, 0).0;
        let n = agent.net.params().len();
        agent.net.params_mut()[n - 1][1].data_mut()[fwd] = 1.0;
        agent
    }

    #[test]
    fn scripted_press_and_rise_flips_within_the_horizon() {
        let mut sim = Simulator::new(PhysicsParams::default(), wall_flush_box(WallId::East));
        let start = flip_start(&sim);
        let agent = scripted_diag();
        let mut rng = rng_for(0, stream::LOW_POLICY, 0);
        let outcome = exec_flip_learned(
            &mut sim,
            &start,
            &agent,
            0.0,
            &mut rng,
            &PrimitiveCtx::default(),
        );
        assert_eq!(outcome.result, OutcomeResult::FlipSuccess);
        assert!(outcome.low_transitions.len() < 35);
        assert_eq!(sim.state.object.resting_face, RestingFace::Standing);
        // Terminal transition carries the flip bonus.
        let last = outcome.low_transitions.last().unwrap();
        assert!(last.terminal);
        assert!(last.reward >= 1.0);
    }

    #[test]
    fn contactless_rollout_fails_with_zero_rewards() {
        let mut sim = Simulator::new(PhysicsParams::default(), wall_flush_box(WallId::East));
        let start = flip_start(&sim);
        let agent = scripted_up();
        let mut rng = rng_for(1, stream::LOW_POLICY, 0);
        let outcome = exec_flip_learned(
            &mut sim,
            &start,
            &agent,
            0.0,
            &mut rng,
            &PrimitiveCtx::default(),
        );
        assert_eq!(outcome.result, OutcomeResult::FlipFail);
        assert_eq!(outcome.low_transitions.len(), 35);
        assert!(outcome.low_transitions.iter().all(|t| t.reward == 0.0));
    }

    #[test]
    fn ramming_forward_hits_the_force_limit() {
        let mut sim = Simulator::new(PhysicsParams::default(), wall_flush_box(WallId::East));
        let start = flip_start(&sim);
        let agent = scripted_ram();
        let mut rng = rng_for(2, stream::LOW_POLICY, 0);
        let outcome = exec_flip_learned(
            &mut sim,
            &start,
            &agent,
            0.0,
            &mut rng,
            &PrimitiveCtx::default(),
        );
        assert_eq!(outcome.result, OutcomeResult::ForceAbort);
        let last = outcome.low_transitions.last().unwrap();
        assert!(last.terminal);
        assert_eq!(last.reward, -1.0);
    }

    #[test]
    fn emitted_rewards_sum_to_the_episode_return() {
        let mut sim = Simulator::new(PhysicsParams::default(), wall_flush_box(WallId::South));
        let obj = sim.state.object;
        let start = StartPose {
            x: obj.pose.x,
            y: obj.pose.y + obj.dims.width / 2.0 + 0.002,
            z: 0.015,
            yaw: -std::f64::consts::FRAC_PI_2,
        };
        let agent = scripted_diag();
        let mut rng = rng_for(3, stream::LOW_POLICY, 0);
        let outcome = exec_flip_learned(
            &mut sim,
            &start,
            &agent,
            0.0,
            &mut rng,
            &PrimitiveCtx::default(),
        );
        let total: f64 = outcome.low_transitions.iter().map(|t| t.reward).sum();
        assert!(total.is_finite());
        assert_eq!(
            outcome.low_transitions.len(),
            outcome
                .low_transitions
                .iter()
                .position(|t| t.terminal)
                .unwrap()
                + 1,
            "exactly one terminal transition, at the end"
        );
    }
}
