//! Simulator state types.

use serde::{Deserialize, Serialize};

use super::geometry::{Footprint, Vec2};

/// Side length of the square workspace box, meters.
pub const WALL_SIDE: f64 = 0.448;

/// Horizontal margin around the workspace the end effector may reach.
pub const REACH_MARGIN: f64 = 0.10;

/// Maximum end-effector height, meters.
pub const REACH_CEILING: f64 = 0.60;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("unplaceable: no non-penetrating pose found in {0} draws")]
    Unplaceable(u32),
    #[error("invalid state: {0}")]
    InvalidState(String),
}

/// Contact and integration constants. All strictly positive.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhysicsParams {
    /// Penalty spring stiffness, N/m of penetration.
    pub contact_stiffness: f64,
    /// Hard cap on any reported contact force, N.
    pub contact_force_cap: f64,
    /// Gravitational acceleration, m/s^2.
    pub gravity: f64,
    /// Maximum end-effector motion per contact-resolution substep, m.
    pub substep_len: f64,
    /// Angular tolerance for settle decisions, rad.
    pub settle_tolerance: f64,
    /// Length of the closed-finger tool below the commanded pose, m.
    pub ee_finger_len: f64,
    /// Friction coefficient between fingertip and object face.
    pub ee_contact_mu: f64,
    /// Fraction of the pinned-contact rotation applied when pushing.
    pub push_compliance: f64,
    /// Gap below which an object counts as touching a wall, m.
    pub wall_contact_tol: f64,
    /// Maximum object-axis-to-wall-normal misalignment for a pivot, rad.
    pub pivot_align_tol: f64,
    /// Yaw relaxation toward flush per meter of wall-blocked slide, rad/m.
    pub yaw_align_rate: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            contact_stiffness: 500.0,
            contact_force_cap: 50.0,
            gravity: 9.81,
            substep_len: 0.002,
            settle_tolerance: 1e-3,
            ee_finger_len: 0.06,
            ee_contact_mu: 0.8,
            push_compliance: 0.3,
            wall_contact_tol: 1.5e-3,
            pivot_align_tol: 0.20,
            yaw_align_rate: 8.0,
        }
    }
}

impl PhysicsParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("contact_stiffness", self.contact_stiffness),
            ("contact_force_cap", self.contact_force_cap),
            ("gravity", self.gravity),
            ("substep_len", self.substep_len),
            ("settle_tolerance", self.settle_tolerance),
            ("ee_finger_len", self.ee_finger_len),
            ("ee_contact_mu", self.ee_contact_mu),
        ];
        for (name, v) in positive {
            if v <= 0.0 || !v.is_finite() {
                return Err(SimError::InvalidState(format!(
                    "physics param {name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RestingFace {
    Flat,
    Standing,
}

/// Object box dimensions. `height` is always the current vertical extent:
/// when a flip completes, the dimension that rotated upright is swapped into
/// `height` so footprint math stays uniform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dims {
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

/// Mid-flip bookkeeping: which wall the object pivots against and which
/// object axis points into it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pivot {
    pub wall: WallId,
    /// True when the object's yaw (length) axis faces the wall; the width
    /// axis otherwise.
    pub u_into_wall: bool,
    /// Object center coordinate along the wall tangent, m. Fixed while
    /// pivoting.
    pub lateral: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    /// Horizontal center-of-mass position and footprint yaw.
    pub pose: Pose2,
    /// Rotation about the horizontal pivot axis while flipping; 0 lying
    /// settled, pi/2 settled upright.
    pub pitch: f64,
    pub dims: Dims,
    pub mass: f64,
    pub friction_mu: f64,
    pub resting_face: RestingFace,
    /// Present only while pitch is strictly between 0 and pi/2.
    pub pivot: Option<Pivot>,
}

impl ObjectState {
    pub fn center(&self) -> Vec2 {
        Vec2::new(self.pose.x, self.pose.y)
    }

    /// True when the object rests on a face (not mid-pivot).
    pub fn is_settled(&self) -> bool {
        self.pitch == 0.0
            || (self.resting_face == RestingFace::Standing
                && (self.pitch - std::f64::consts::FRAC_PI_2).abs() < 1e-9)
    }

    /// Footprint rectangle of a settled object.
    pub fn footprint(&self) -> Footprint {
        Footprint {
            center: self.center(),
            yaw: self.pose.yaw,
            half_u: self.dims.length / 2.0,
            half_v: self.dims.width / 2.0,
        }
    }

    /// Top surface height of a settled object, m.
    pub fn top_height(&self) -> f64 {
        self.dims.height
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dims.length > 0.0 && self.dims.width > 0.0 && self.dims.height > 0.0) {
            return Err(SimError::InvalidState("object dims must be positive".into()));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-9).contains(&self.pitch) {
            return Err(SimError::InvalidState(format!(
                "pitch {} outside [0, pi/2]",
                self.pitch
            )));
        }
        if !(self.friction_mu > 0.0 && self.friction_mu < 2.0) {
            return Err(SimError::InvalidState(format!(
                "friction {} outside (0, 2)",
                self.friction_mu
            )));
        }
        if self.mass <= 0.0 {
            return Err(SimError::InvalidState("mass must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gripper {
    Open,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EePose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
    pub pitch_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EeDisplacement {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub dyaw: f64,
    pub dpitch_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndEffectorState {
    pub pose: EePose,
    pub gripper: Gripper,
    /// Maximum finger separation, m.
    pub max_opening: f64,
}

impl EndEffectorState {
    /// World position of the fingertip contact point. Tilting about the
    /// y-axis of the tool frame swings the tip forward along the yaw
    /// direction and slightly up.
    pub fn tip(&self, finger_len: f64) -> (Vec2, f64) {
        let fwd = Vec2::from_angle(self.pose.yaw);
        let xy = Vec2::new(self.pose.x, self.pose.y)
            + fwd.scaled(finger_len * self.pose.pitch_y.sin());
        let z = self.pose.z + finger_len * (1.0 - self.pose.pitch_y.cos());
        (xy, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WallId {
    West,
    East,
    South,
    North,
}

impl WallId {
    pub const ALL: [WallId; 4] = [WallId::West, WallId::East, WallId::South, WallId::North];

    /// Unit normal pointing out of the workspace, into the wall.
    pub fn normal_out(self) -> Vec2 {
        match self {
            WallId::West => Vec2::new(-1.0, 0.0),
            WallId::East => Vec2::new(1.0, 0.0),
            WallId::South => Vec2::new(0.0, -1.0),
            WallId::North => Vec2::new(0.0, 1.0),
        }
    }

    pub fn tangent(self) -> Vec2 {
        self.normal_out().perp()
    }

    /// Wall plane position measured along the outward normal.
    pub fn plane_coord(self) -> f64 {
        match self {
            WallId::West | WallId::South => 0.0,
            WallId::East | WallId::North => WALL_SIDE,
        }
    }

    /// Gap between a footprint and this wall (negative when penetrating).
    pub fn gap(self, fp: &Footprint) -> f64 {
        let (_, hi) = fp.support_interval(self.normal_out());
        self.plane_coord() - hi
    }
}

/// Ground-truth simulator state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceState {
    pub object: ObjectState,
    pub ee: EndEffectorState,
    /// Object rigidly attached to the closed gripper.
    pub held: bool,
    /// Vertical distance from fingertip to object bottom while held, m.
    pub held_grip_offset: f64,
}

impl WorkspaceState {
    /// Height of the object bottom above the floor, m.
    pub fn object_bottom_height(&self, finger_len: f64) -> f64 {
        if self.held {
            let (_, tip_z) = self.ee.tip(finger_len);
            (tip_z - self.held_grip_offset).max(0.0)
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.object.validate()?;
        if self.held && self.ee.gripper != Gripper::Closed {
            return Err(SimError::InvalidState(
                "held object requires a closed gripper".into(),
            ));
        }
        Ok(())
    }
}

/// Forces observed over the most recent end-effector step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ContactReading {
    /// Force component along the active primitive's forward axis, N.
    pub f_d: f64,
    /// Largest instantaneous contact force since the previous reading, N.
    pub f_max: f64,
    /// Contact force magnitude at the end of the step, N.
    pub f_current: f64,
}
