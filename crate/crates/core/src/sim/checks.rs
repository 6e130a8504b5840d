//! Outcome predicates evaluated on settled states.

use serde::{Deserialize, Serialize};

use super::geometry::wrap_angle;
use super::types::{RestingFace, WallId, WorkspaceState};

/// Thresholds for the outcome predicates.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CheckParams {
    /// Edge-to-wall distance that counts as "near a wall", m.
    pub wall_proximity: f64,
    /// Translation that counts as a workspace change, m.
    pub change_pos: f64,
    /// Rotation that counts as a workspace change, rad.
    pub change_yaw: f64,
    /// Minimum object-bottom height for a successful grasp, m.
    pub grasp_min_height: f64,
}

impl Default for CheckParams {
    fn default() -> Self {
        Self {
            wall_proximity: 0.01,
            change_pos: 0.01,
            change_yaw: 5.0f64.to_radians(),
            grasp_min_height: 0.10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PushResult {
    AtWall,
    Changed,
    NoChange,
}

/// Smallest edge-to-wall distance of the object footprint.
pub fn min_wall_gap(state: &WorkspaceState) -> f64 {
    let fp = state.object.footprint();
    WallId::ALL
        .into_iter()
        .map(|w| w.gap(&fp))
        .fold(f64::INFINITY, f64::min)
}

/// A flip succeeded iff the object went from lying flat to standing.
pub fn check_flip_success(before: &WorkspaceState, after: &WorkspaceState) -> bool {
    before.object.resting_face == RestingFace::Flat
        && after.object.resting_face == RestingFace::Standing
}

/// Push outcome: newly near a wall beats any change beats nothing.
pub fn check_push_success(
    before: &WorkspaceState,
    after: &WorkspaceState,
    p: &CheckParams,
) -> PushResult {
    let near_before = min_wall_gap(before) <= p.wall_proximity;
    let near_after = min_wall_gap(after) <= p.wall_proximity;
    if near_after && !near_before {
        return PushResult::AtWall;
    }
    let moved = (after.object.pose.x - before.object.pose.x)
        .hypot(after.object.pose.y - before.object.pose.y);
    let turned = wrap_angle(after.object.pose.yaw - before.object.pose.yaw).abs();
    if moved > p.change_pos || turned > p.change_yaw {
        PushResult::Changed
    } else {
        PushResult::NoChange
    }
}

/// A grasp succeeded iff the object is attached and lifted clear of the
/// floor.
pub fn check_grasp_success(state: &WorkspaceState, p: &CheckParams, finger_len: f64) -> bool {
    state.held && state.object_bottom_height(finger_len) >= p.grasp_min_height - 1e-9
}
