//! Deterministic 2.5D quasi-static physics of a box inside a four-walled
//! 44.8 x 44.8 cm workspace, manipulated by a two-finger end effector with a
//! penalty-based contact model.
//!
//! The model is intentionally minimal: pushes are kinematic slides with a
//! compliance rotation, flips are rolling pivots in the vertical plane at a
//! wall, and everything settles quasi-statically. For equal (state, inputs,
//! seed) every operation returns bitwise-equal outputs.

pub mod checks;
pub mod geometry;
pub mod oracle;
pub mod reset;
pub mod settle;
pub mod step;
pub mod test_support;
pub mod types;

pub use checks::{
    check_flip_success, check_grasp_success, check_push_success, min_wall_gap, CheckParams,
    PushResult,
};
pub use geometry::{wrap_angle, Footprint, Vec2};
pub use reset::{home_pose, reset, ObjectRanges, Placement, DEFAULT_MAX_OPENING};
pub use settle::settle;
pub use step::{misalignment, Simulator};
pub use types::{
    ContactReading, Dims, EeDisplacement, EePose, EndEffectorState, Gripper, ObjectState,
    PhysicsParams, Pivot, Pose2, RestingFace, SimError, WallId, WorkspaceState, REACH_MARGIN,
    WALL_SIDE,
};
