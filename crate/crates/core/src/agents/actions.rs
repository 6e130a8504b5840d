//! Action spaces of the two agents.

use serde::{Deserialize, Serialize};

use crate::perception::MaskChannel;

/// The manipulation primitives the high-level agent chooses between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitive {
    Push,
    Flip,
    Grasp,
}

impl Primitive {
    pub const ALL: [Primitive; 3] = [Primitive::Push, Primitive::Flip, Primitive::Grasp];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        match self {
            Primitive::Push => 0,
            Primitive::Flip => 1,
            Primitive::Grasp => 2,
        }
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    /// Grasps start on the object; pushes and flips start beside it.
    pub fn mask_channel(self) -> MaskChannel {
        match self {
            Primitive::Grasp => MaskChannel::Footprint,
            Primitive::Push | Primitive::Flip => MaskChannel::Band,
        }
    }
}

/// One pixel of one rotated Q map plus a primitive choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighLevelAction {
    pub x: usize,
    pub y: usize,
    /// Rotation index in [0, K).
    pub i: usize,
    /// Primitive id.
    pub phi: Primitive,
}

/// Step sizes of the discrete low-level displacement set.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LowActionParams {
    /// Forward step, m.
    pub a_d: f64,
    /// Vertical step, m.
    pub a_z: f64,
    /// Tool tilt step, rad.
    pub r_y: f64,
}

impl Default for LowActionParams {
    fn default() -> Self {
        Self {
            a_d: 0.005,
            a_z: 0.005,
            r_y: 2.0f64.to_radians(),
        }
    }
}

/// Index into the 2 x 2 x 3 grid of (forward, vertical, tilt) choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowLevelAction(pub usize);

impl LowLevelAction {
    pub const COUNT: usize = 12;

    /// Decode to the displacement triple (d, z, theta_y).
    pub fn decode(self, p: &LowActionParams) -> (f64, f64, f64) {
        debug_assert!(self.0 < Self::COUNT);
        let d_i = self.0 / 6;
        let z_i = (self.0 / 3) % 2;
        let t_i = self.0 % 3;
        (
            d_i as f64 * p.a_d,
            z_i as f64 * p.a_z,
            (t_i as f64 - 1.0) * p.r_y,
        )
    }

    pub fn encode(d_on: bool, z_on: bool, tilt: i8) -> Self {
        let d_i = usize::from(d_on);
        let z_i = usize::from(z_on);
        let t_i = (tilt + 1) as usize;
        Self(d_i * 6 + z_i * 3 + t_i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_action_index_triple_bijection() {
        let p = LowActionParams::default();
        let mut seen = std::collections::HashSet::new();
        for idx in 0..LowLevelAction::COUNT {
            let a = LowLevelAction(idx);
            let (d, z, t) = a.decode(&p);
            assert!(d == 0.0 || (d - 0.005).abs() < 1e-12);
            assert!(z == 0.0 || (z - 0.005).abs() < 1e-12);
            assert!(t.abs() < 1e-12 || (t.abs() - 2.0f64.to_radians()).abs() < 1e-12);
            assert!(seen.insert((d.to_bits(), z.to_bits(), t.to_bits())));
            let tilt = if t > 1e-9 {
                1
            } else if t < -1e-9 {
                -1
            } else {
                0
            };
            let back = LowLevelAction::encode(d > 0.0, z > 0.0, tilt);
            assert_eq!(back, a);
        }
        assert_eq!(seen.len(), 12);
    }
}
