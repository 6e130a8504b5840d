//! The scripted top-down grasp: open, descend around the object, close,
//! lift. Finger-level contact is not simulated; attachment is decided
//! geometrically.

use crate::agents::Primitive;
use crate::perception::StartPose;
use crate::sim::{
    check_grasp_success, EeDisplacement, EePose, Gripper, Simulator, Vec2, WALL_SIDE,
};

use super::{OutcomeResult, PrimitiveCtx, PrimitiveOutcome};

pub fn exec_grasp(sim: &mut Simulator, start: &StartPose, ctx: &PrimitiveCtx) -> PrimitiveOutcome {
    let before = sim.state.clone();
    let result = attempt(sim, start, ctx);
    PrimitiveOutcome {
        kind: Primitive::Grasp,
        result,
        before,
        after: sim.state.clone(),
        low_transitions: Vec::new(),
    }
}

fn attempt(sim: &mut Simulator, start: &StartPose, ctx: &PrimitiveCtx) -> OutcomeResult {
    let obj = sim.state.object;
    if !obj.is_settled() || sim.state.held {
        return OutcomeResult::GraspFail;
    }
    let fp = obj.footprint();
    let axis = Vec2::from_angle(start.yaw);
    let p = Vec2::new(start.x, start.y);
    let max_opening = sim.state.ee.max_opening;

    // Fingertip landing height: just below the object top.
    let z_grasp = (obj.top_height() - ctx.exec.grasp_depth).max(0.005);

    // Descent clearance: fingers straddling the grasp line must not drive
    // into a wall rim.
    for sign in [-1.0, 1.0] {
        let finger = p + axis.scaled(sign * max_opening / 2.0);
        let outside = !(0.0..=WALL_SIDE).contains(&finger.x)
            || !(0.0..=WALL_SIDE).contains(&finger.y);
        if outside && z_grasp < ctx.exec.rim_height {
            return OutcomeResult::GraspFail;
        }
    }

    // Antipodal geometry along the grasp axis.
    let span = fp.extent_along(axis);
    if span > max_opening {
        return OutcomeResult::GraspFail;
    }
    // The closed fingers must land on parallel faces: the caliper width has
    // to match one of the footprint dimensions.
    let dims_match = (span - obj.dims.length).abs() <= ctx.exec.grasp_dim_tol
        || (span - obj.dims.width).abs() <= ctx.exec.grasp_dim_tol;
    if !dims_match {
        return OutcomeResult::GraspFail;
    }
    let offset = obj.center() - p;
    // Grasp line must pass near the center of mass, and the fingers must
    // straddle the object.
    if offset.cross(axis).abs() > ctx.exec.grasp_center_tol {
        return OutcomeResult::GraspFail;
    }
    if offset.dot(axis).abs() > (max_opening - span) / 2.0 {
        return OutcomeResult::GraspFail;
    }

    // Execute: descend open, close, lift.
    sim.state.ee.gripper = Gripper::Open;
    sim.teleport_ee(EePose {
        x: start.x,
        y: start.y,
        z: z_grasp,
        yaw: start.yaw,
        pitch_y: 0.0,
    });
    sim.state.ee.gripper = Gripper::Closed;
    sim.state.held = true;
    sim.state.held_grip_offset = z_grasp;
    sim.step_ee(EeDisplacement {
        dz: ctx.exec.grasp_lift,
        ..Default::default()
    });
    if check_grasp_success(&sim.state, &ctx.check, sim.params.ee_finger_len) {
        OutcomeResult::GraspSuccess
    } else {
        sim.state.held = false;
        OutcomeResult::GraspFail
    }
}
