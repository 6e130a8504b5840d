//! Canned scene builders shared by unit, integration, and acceptance tests.

use super::reset::{home_pose, DEFAULT_MAX_OPENING};
use super::types::{
    Dims, EndEffectorState, Gripper, ObjectState, Pivot, Pose2, RestingFace, WallId,
    WorkspaceState, WALL_SIDE,
};

/// 14.2 x 9.1 x 4.1 cm, 209 g box.
pub fn reference_box() -> (Dims, f64, f64) {
    (
        Dims {
            length: 0.142,
            width: 0.091,
            height: 0.041,
        },
        0.209,
        0.5,
    )
}

pub fn default_ee() -> EndEffectorState {
    EndEffectorState {
        pose: home_pose(),
        gripper: Gripper::Closed,
        max_opening: DEFAULT_MAX_OPENING,
    }
}

/// Reference box lying flat at (x, y) with the given yaw.
pub fn flat_box_at(x: f64, y: f64, yaw: f64) -> WorkspaceState {
    let (dims, mass, mu) = reference_box();
    WorkspaceState {
        object: ObjectState {
            pose: Pose2 { x, y, yaw },
            pitch: 0.0,
            dims,
            mass,
            friction_mu: mu,
            resting_face: RestingFace::Flat,
            pivot: None,
        },
        ee: default_ee(),
        held: false,
        held_grip_offset: 0.0,
    }
}

/// A box flush against `wall` with the given extent `w_d` facing the wall
/// and height `h`, long axis along the wall, pivot bookkeeping installed.
/// Callers set `object.pitch` afterwards to build mid-flip states.
pub fn pitched_at_wall(wall: WallId, w_d: f64, h: f64, lateral_offset: f64) -> WorkspaceState {
    let t = wall.tangent();
    let n = wall.normal_out();
    let yaw = t.y.atan2(t.x);
    let lateral_coord = WALL_SIDE / 2.0 + lateral_offset;
    let lateral_proj = if t.x + t.y > 0.0 {
        lateral_coord
    } else {
        -lateral_coord
    };
    let s = wall.plane_coord() - w_d / 2.0;
    let pos = n.scaled(s) + t.scaled(lateral_proj);
    let mut state = flat_box_at(pos.x, pos.y, yaw);
    state.object.dims = Dims {
        length: 0.142,
        width: w_d,
        height: h,
    };
    state.object.pivot = Some(Pivot {
        wall,
        u_into_wall: false,
        lateral: lateral_proj,
    });
    state
}

/// Flush box with default reference dims, width facing the wall.
pub fn wall_flush_box(wall: WallId) -> WorkspaceState {
    let (dims, _, _) = reference_box();
    let mut state = pitched_at_wall(wall, dims.width, dims.height, 0.0);
    state.object.pivot = None;
    state
}
