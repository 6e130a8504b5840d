//! The scripted push: close the gripper, lower to the start pose, translate
//! along the start yaw, retract.

use crate::agents::Primitive;
use crate::perception::StartPose;
use crate::sim::{
    check_push_success, home_pose, settle, EeDisplacement, EePose, Gripper, PushResult, Simulator,
    REACH_MARGIN, WALL_SIDE,
};

use super::{OutcomeResult, PrimitiveCtx, PrimitiveOutcome};

pub fn exec_push(sim: &mut Simulator, start: &StartPose, ctx: &PrimitiveCtx) -> PrimitiveOutcome {
    let before = sim.state.clone();
    let reachable = (-REACH_MARGIN..=WALL_SIDE + REACH_MARGIN).contains(&start.x)
        && (-REACH_MARGIN..=WALL_SIDE + REACH_MARGIN).contains(&start.y);
    if reachable {
        sim.state.ee.gripper = Gripper::Closed;
        sim.teleport_ee(EePose {
            x: start.x,
            y: start.y,
            z: start.z,
            yaw: start.yaw,
            pitch_y: 0.0,
        });
        sim.set_forward_axis(start.yaw);
        let stroke = ctx.exec.push_stroke;
        sim.step_ee(EeDisplacement {
            dx: stroke * start.yaw.cos(),
            dy: stroke * start.yaw.sin(),
            ..Default::default()
        });
        sim.teleport_ee(home_pose());
        settle(&sim.params, &mut sim.state);
    }
    let result = match check_push_success(&before, &sim.state, &ctx.check) {
        PushResult::AtWall => OutcomeResult::AtWall,
        PushResult::Changed => OutcomeResult::Changed,
        PushResult::NoChange => OutcomeResult::NoChange,
    };
    PrimitiveOutcome {
        kind: Primitive::Push,
        result,
        before,
        after: sim.state.clone(),
        low_transitions: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::test_support::flat_box_at;
    use crate::sim::{min_wall_gap, PhysicsParams, WorkspaceState};

    fn ctx() -> PrimitiveCtx {
        PrimitiveCtx::default()
    }

    fn sim_with(state: WorkspaceState) -> Simulator {
        Simulator::new(PhysicsParams::default(), state)
    }

    #[test]
    fn push_toward_near_wall_reaches_it() {
        // Object 8 cm from the east wall, pushed straight east.
        let half_len = 0.142 / 2.0;
        let x = WALL_SIDE - 0.08 - half_len;
        let mut sim = sim_with(flat_box_at(x, 0.224, 0.0));
        let start = StartPose {
            x: x - half_len - 0.01,
            y: 0.224,
            z: 0.02,
            yaw: 0.0,
        };
        let outcome = exec_push(&mut sim, &start, &ctx());
        assert_eq!(outcome.result, OutcomeResult::AtWall);
        assert!(min_wall_gap(&sim.state) <= ctx().check.wall_proximity);
        assert!(outcome.is_consistent());
    }

    #[test]
    fn push_through_empty_space_changes_nothing() {
        let mut sim = sim_with(flat_box_at(0.35, 0.35, 0.0));
        let start = StartPose {
            x: 0.05,
            y: 0.05,
            z: 0.02,
            yaw: 0.0,
        };
        let outcome = exec_push(&mut sim, &start, &ctx());
        assert_eq!(outcome.result, OutcomeResult::NoChange);
        assert_eq!(outcome.before.object, outcome.after.object);
    }

    #[test]
    fn glancing_push_rotates_the_object_in_place() {
        // Strike near a corner: mostly rotation, little travel toward any
        // wall.
        let mut sim = sim_with(flat_box_at(0.224, 0.224, 0.0));
        let start = StartPose {
            x: 0.224 - 0.0075,
            y: 0.224 - 0.0455 - 0.012,
            z: 0.02,
            yaw: std::f64::consts::FRAC_PI_2,
        };
        let mut ctx = ctx();
        ctx.exec.push_stroke = 0.03;
        let outcome = exec_push(&mut sim, &start, &ctx);
        assert_eq!(outcome.result, OutcomeResult::Changed);
        let dyaw = crate::sim::wrap_angle(
            outcome.after.object.pose.yaw - outcome.before.object.pose.yaw,
        );
        assert!(dyaw.abs() > 0.0, "push should have rotated or moved");
    }
}
