//! Gravity relaxation and the wall-pivot kinematics shared with stepping.
//!
//! Mid-flip the box rolls between two sliding contacts: its bottom-far edge
//! on the floor and its top-far corner on the wall. The center of mass rises
//! until the balance angle atan(w_d / h) and falls toward standing beyond it.

use super::geometry::Vec2;
use super::types::{ObjectState, PhysicsParams, Pivot, RestingFace, WallId};

/// In-plane description of a pivot in progress. Coordinates: `s` along the
/// wall's outward normal (wall plane at `plane`), `z` up.
#[derive(Debug, Clone, Copy)]
pub struct PivotPlane {
    pub wall: WallId,
    /// Footprint extent along the wall normal when flat, m.
    pub w_d: f64,
    /// Lateral footprint extent, m.
    pub l_perp: f64,
    /// Vertical extent when flat, m.
    pub h: f64,
    /// Object center coordinate along the wall tangent, m.
    pub lateral: f64,
    /// Wall plane coordinate along the outward normal, m.
    pub plane: f64,
}

impl PivotPlane {
    pub fn from_pivot(obj: &ObjectState, pivot: &Pivot) -> Self {
        let (w_d, l_perp) = if pivot.u_into_wall {
            (obj.dims.length, obj.dims.width)
        } else {
            (obj.dims.width, obj.dims.length)
        };
        Self {
            wall: pivot.wall,
            w_d,
            l_perp,
            h: obj.dims.height,
            lateral: pivot.lateral,
            plane: pivot.wall.plane_coord(),
        }
    }

    /// Pitch beyond which the center of mass crosses the floor pivot edge.
    pub fn balance_angle(&self) -> f64 {
        (self.w_d / self.h).atan()
    }

    /// Center-of-mass height at pitch `theta`, m.
    pub fn com_height(&self, theta: f64) -> f64 {
        (self.w_d / 2.0) * theta.sin() + (self.h / 2.0) * theta.cos()
    }

    /// Center-of-mass coordinate along the outward normal at pitch `theta`.
    pub fn com_s(&self, theta: f64) -> f64 {
        self.plane - (self.h / 2.0) * theta.sin() - (self.w_d / 2.0) * theta.cos()
    }

    /// Bottom-near corner (s, z) of the cross-section at pitch `theta`.
    pub fn near_corner(&self, theta: f64) -> (f64, f64) {
        (
            self.plane - self.h * theta.sin() - self.w_d * theta.cos(),
            self.w_d * theta.sin(),
        )
    }

    /// World position of the center of mass at pitch `theta`.
    pub fn com_world(&self, theta: f64) -> Vec2 {
        let n = self.wall.normal_out();
        let t = self.wall.tangent();
        n.scaled(self.com_s(theta)) + t.scaled(self.lateral)
    }
}

/// Infer pivot bookkeeping for states built without it (tests construct
/// pitched states directly).
pub fn infer_pivot(obj: &ObjectState) -> Pivot {
    let fp = obj.footprint();
    let wall = WallId::ALL
        .into_iter()
        .min_by(|a, b| a.gap(&fp).total_cmp(&b.gap(&fp)))
        .unwrap();
    let n = wall.normal_out();
    let u_into_wall = fp.axis_u().dot(n).abs() >= fp.axis_v().dot(n).abs();
    Pivot {
        wall,
        u_into_wall,
        lateral: obj.center().dot(wall.tangent()),
    }
}

/// Finish the fall onto the wall-side face: the extent that pointed into the
/// wall rotates upright, the old height becomes the footprint extent along
/// the wall normal.
pub fn complete_standing(obj: &mut ObjectState, pivot: &Pivot) {
    let plane = PivotPlane::from_pivot(obj, pivot);
    let old_h = obj.dims.height;
    if pivot.u_into_wall {
        obj.dims = super::types::Dims {
            length: old_h,
            width: obj.dims.width,
            height: obj.dims.length,
        };
    } else {
        obj.dims = super::types::Dims {
            length: obj.dims.length,
            width: old_h,
            height: obj.dims.width,
        };
    }
    let n = pivot.wall.normal_out();
    let t = pivot.wall.tangent();
    let pos = n.scaled(plane.plane - old_h / 2.0) + t.scaled(pivot.lateral);
    obj.pose.x = pos.x;
    obj.pose.y = pos.y;
    obj.pitch = std::f64::consts::FRAC_PI_2;
    obj.resting_face = RestingFace::Standing;
    obj.pivot = None;
}

/// Drop the object back onto its original bottom face, flush to the wall.
pub fn fall_back_flat(obj: &mut ObjectState, pivot: &Pivot) {
    let plane = PivotPlane::from_pivot(obj, pivot);
    let pos = pivot
        .wall
        .normal_out()
        .scaled(plane.plane - plane.w_d / 2.0)
        + pivot.wall.tangent().scaled(pivot.lateral);
    obj.pose.x = pos.x;
    obj.pose.y = pos.y;
    obj.pitch = 0.0;
    obj.pivot = None;
}

/// Translate a settled footprint inside the workspace walls.
pub fn project_into_workspace(obj: &mut ObjectState) {
    let fp = obj.footprint();
    let hx = fp.extent_along(Vec2::new(1.0, 0.0)) / 2.0;
    let hy = fp.extent_along(Vec2::new(0.0, 1.0)) / 2.0;
    obj.pose.x = obj.pose.x.clamp(hx, super::types::WALL_SIDE - hx);
    obj.pose.y = obj.pose.y.clamp(hy, super::types::WALL_SIDE - hy);
}

/// Quasi-static gravity relaxation of a possibly mid-pivot object. Pitch at
/// or below the balance angle falls back flat; beyond it the object settles
/// standing against the wall.
pub fn settle(params: &PhysicsParams, state: &mut super::types::WorkspaceState) {
    if state.held {
        return;
    }
    let obj = &mut state.object;
    if obj.pitch <= params.settle_tolerance {
        obj.pitch = 0.0;
        obj.pivot = None;
        project_into_workspace(obj);
        return;
    }
    if obj.resting_face == RestingFace::Standing {
        // Already settled upright; nothing to relax.
        project_into_workspace(obj);
        return;
    }
    let pivot = obj.pivot.unwrap_or_else(|| infer_pivot(obj));
    let plane = PivotPlane::from_pivot(obj, &pivot);
    if obj.pitch > plane.balance_angle() {
        complete_standing(obj, &pivot);
    } else {
        fall_back_flat(obj, &pivot);
    }
    project_into_workspace(obj);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::test_support::{flat_box_at, pitched_at_wall};
    use crate::sim::types::WALL_SIDE;

    #[test]
    fn settled_state_is_unchanged() {
        let params = PhysicsParams::default();
        let mut state = flat_box_at(0.2, 0.2, 0.0);
        let before = state.clone();
        settle(&params, &mut state);
        assert_eq!(before, state);
    }

    #[test]
    fn pitch_above_balance_settles_standing() {
        let params = PhysicsParams::default();
        // Width faces the east wall: balance angle atan(width / height).
        let mut state = pitched_at_wall(WallId::East, 0.091, 0.041, 0.0);
        let theta_b = (0.091f64 / 0.041).atan();
        state.object.pitch = theta_b + 0.05;
        settle(&params, &mut state);
        assert_eq!(state.object.resting_face, RestingFace::Standing);
        assert!((state.object.pitch - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        // Vertical extent is now the old width; footprint reaches the wall.
        assert!((state.object.dims.height - 0.091).abs() < 1e-12);
        let gap = WallId::East.gap(&state.object.footprint());
        assert!(gap.abs() < 1e-9, "gap {gap}");
        assert!(state.object.pose.x < WALL_SIDE);
    }

    #[test]
    fn pitch_below_balance_falls_back_flat() {
        let params = PhysicsParams::default();
        let mut state = pitched_at_wall(WallId::East, 0.091, 0.041, 0.0);
        let theta_b = (0.091f64 / 0.041).atan();
        state.object.pitch = theta_b - 0.05;
        let dims_before = state.object.dims;
        settle(&params, &mut state);
        assert_eq!(state.object.resting_face, RestingFace::Flat);
        assert_eq!(state.object.pitch, 0.0);
        assert_eq!(state.object.dims, dims_before);
    }
}
