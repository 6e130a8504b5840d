//! The manually designed three-stage flip baseline: advance to contact,
//! rise diagonally while holding the contact force inside a band, then
//! drive forward regulating the upward motion.

use serde::{Deserialize, Serialize};

use crate::agents::Primitive;
use crate::perception::StartPose;
use crate::sim::{
    check_flip_success, home_pose, settle, EeDisplacement, EePose, Gripper, Simulator,
};

use super::{OutcomeResult, PrimitiveCtx, PrimitiveOutcome};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ManualFlipParams {
    /// Lower edge of the stage-2 force band, N.
    pub force_low: f64,
    /// Upper edge of the force band, N.
    pub force_high: f64,
    /// Object pitch at which stage 2 hands over to stage 3, rad.
    pub stage2_pitch: f64,
}

impl Default for ManualFlipParams {
    fn default() -> Self {
        Self {
            force_low: 8.0,
            force_high: 10.0,
            stage2_pitch: 45.0f64.to_radians(),
        }
    }
}

/// Fixed-policy flip with the same action interface, horizon, and
/// termination rules as the learned controller.
pub fn exec_flip_manual(
    sim: &mut Simulator,
    start: &StartPose,
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

    let (dir_x, dir_y) = (start.yaw.cos(), start.yaw.sin());
    let a_d = ctx.exec.low_action.a_d;
    let a_z = ctx.exec.low_action.a_z;
    let p = &ctx.manual;
    let mut result = OutcomeResult::FlipFail;
    let mut force = 0.0f64;
    let mut contacted = false;

    for _tau in 1..=ctx.exec.horizon {
        let pitch = sim.state.object.pitch;
        let (d, z) = if !contacted {
            // Stage 1: advance until contact is established.
            (a_d, 0.0)
        } else if pitch < p.stage2_pitch {
            // Stage 2: committed 45-degree diagonal; shed force above the
            // band by rising only. The commitment to rising is what loses
            // objects that slide instead of wedging.
            if force > p.force_high {
                (0.0, a_z)
            } else {
                (a_d, a_z)
            }
        } else {
            // Stage 3: forward, rising only to shed excess force.
            if force >= p.force_high {
                (a_d, a_z)
            } else {
                (a_d, 0.0)
            }
        };
        let reading = sim.step_ee(EeDisplacement {
            dx: d * dir_x,
            dy: d * dir_y,
            dz: z,
            ..Default::default()
        });
        force = reading.f_current;
        if force > 0.0 {
            contacted = true;
        }

        let mut probe = sim.state.clone();
        settle(&sim.params, &mut probe);
        if check_flip_success(&before, &probe) {
            result = OutcomeResult::FlipSuccess;
            break;
        }
        if reading.f_max > ctx.reward.f_limit {
            result = OutcomeResult::ForceAbort;
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
        low_transitions: Vec::new(),
    }
}
