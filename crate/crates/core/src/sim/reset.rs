//! Scene construction with randomized object parameters.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::Vec2;
use super::types::{
    Dims, EePose, EndEffectorState, Gripper, ObjectState, PhysicsParams, Pose2, RestingFace,
    SimError, WallId, WorkspaceState, WALL_SIDE,
};

const MAX_PLACEMENT_DRAWS: u32 = 1000;

/// Default maximum finger separation, m. Too narrow to grasp any of the
/// randomized objects from above while they lie flat, wide enough once they
/// stand.
pub const DEFAULT_MAX_OPENING: f64 = 0.08;

/// End-effector home pose, outside the workspace and clear of the camera
/// view.
pub fn home_pose() -> EePose {
    EePose {
        x: -0.05,
        y: -0.05,
        z: 0.30,
        yaw: 0.0,
        pitch_y: 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    CloseToWall,
    Random,
}

/// Sampling ranges for the randomized object, all inclusive.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ObjectRanges {
    pub length: (f64, f64),
    pub width: (f64, f64),
    pub height: (f64, f64),
    pub mass: (f64, f64),
    pub friction_mu: (f64, f64),
}

impl Default for ObjectRanges {
    fn default() -> Self {
        Self {
            length: (0.10, 0.20),
            width: (0.09, 0.12),
            height: (0.03, 0.05),
            mass: (0.05, 0.40),
            friction_mu: (0.2, 0.8),
        }
    }
}

impl ObjectRanges {
    /// Point ranges pin every draw to one object.
    pub fn fixed(dims: Dims, mass: f64, friction_mu: f64) -> Self {
        Self {
            length: (dims.length, dims.length),
            width: (dims.width, dims.width),
            height: (dims.height, dims.height),
            mass: (mass, mass),
            friction_mu: (friction_mu, friction_mu),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, (lo, hi)) in [
            ("length", self.length),
            ("width", self.width),
            ("height", self.height),
            ("mass", self.mass),
            ("friction_mu", self.friction_mu),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(SimError::InvalidState(format!(
                    "range {name} = ({lo}, {hi}) must be ordered and positive"
                )));
            }
        }
        if self.friction_mu.1 >= 2.0 {
            return Err(SimError::InvalidState(
                "friction range must stay below 2".into(),
            ));
        }
        Ok(())
    }

    fn sample_range(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
        if hi > lo {
            rng.random_range(lo..hi)
        } else {
            lo
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> (Dims, f64, f64) {
        let dims = Dims {
            length: Self::sample_range(rng, self.length),
            width: Self::sample_range(rng, self.width),
            height: Self::sample_range(rng, self.height),
        };
        (
            dims,
            Self::sample_range(rng, self.mass),
            Self::sample_range(rng, self.friction_mu),
        )
    }
}

/// Build a fresh scene. The object lies flat and does not penetrate the
/// walls; the end effector sits at the home pose; every draw is a pure
/// function of `seed`.
pub fn reset(
    params: &PhysicsParams,
    ranges: &ObjectRanges,
    placement: Placement,
    max_opening: f64,
    seed: u64,
) -> Result<WorkspaceState, SimError> {
    params.validate()?;
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dims, mass, friction_mu) = ranges.sample(&mut rng);
    let mut object = ObjectState {
        pose: Pose2 {
            x: 0.0,
            y: 0.0,
            yaw: 0.0,
        },
        pitch: 0.0,
        dims,
        mass,
        friction_mu,
        resting_face: RestingFace::Flat,
        pivot: None,
    };

    match placement {
        Placement::Random => {
            let mut placed = false;
            for _ in 0..MAX_PLACEMENT_DRAWS {
                let yaw = rng.random_range(0.0..std::f64::consts::TAU);
                let x = rng.random_range(0.0..WALL_SIDE);
                let y = rng.random_range(0.0..WALL_SIDE);
                object.pose = Pose2 { x, y, yaw };
                if fits_inside(&object) {
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(SimError::Unplaceable(MAX_PLACEMENT_DRAWS));
            }
        }
        Placement::CloseToWall => {
            let mut placed = false;
            for _ in 0..MAX_PLACEMENT_DRAWS {
                let wall = WallId::ALL[rng.random_range(0..4usize)];
                let t = wall.tangent();
                let n = wall.normal_out();
                // Long axis along the wall, small jitter, gap within 1 cm.
                let tangent_yaw = t.y.atan2(t.x);
                let yaw = tangent_yaw + rng.random_range(-0.087..0.087);
                let gap = rng.random_range(0.0..0.005);
                object.pose.yaw = yaw;
                let fp = object.footprint();
                let half_n = fp.extent_along(n) / 2.0;
                let half_t = fp.extent_along(t) / 2.0;
                if 2.0 * half_t >= WALL_SIDE {
                    continue;
                }
                let lateral_span = WALL_SIDE / 2.0 - half_t - 0.01;
                if lateral_span <= 0.0 {
                    continue;
                }
                let lateral =
                    WALL_SIDE / 2.0 + rng.random_range(-lateral_span..lateral_span);
                let s = wall.plane_coord() - gap - half_n;
                let pos = reconstruct(wall, s, pos_lateral(wall, lateral));
                object.pose.x = pos.x;
                object.pose.y = pos.y;
                if fits_inside(&object) {
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(SimError::Unplaceable(MAX_PLACEMENT_DRAWS));
            }
        }
    }

    let state = WorkspaceState {
        object,
        ee: EndEffectorState {
            pose: home_pose(),
            gripper: Gripper::Closed,
            max_opening,
        },
        held: false,
        held_grip_offset: 0.0,
    };
    state.validate()?;
    Ok(state)
}

fn fits_inside(object: &ObjectState) -> bool {
    let fp = object.footprint();
    WallId::ALL.into_iter().all(|w| w.gap(&fp) >= 0.0)
}

fn pos_lateral(wall: WallId, lateral: f64) -> f64 {
    // Tangent projection of the desired center: the tangent basis may point
    // along -x or -y; express the workspace coordinate in that basis.
    let t = wall.tangent();
    if t.x + t.y > 0.0 {
        lateral
    } else {
        -lateral
    }
}

fn reconstruct(wall: WallId, s: f64, lateral_proj: f64) -> Vec2 {
    wall.normal_out().scaled(s) + wall.tangent().scaled(lateral_proj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::checks::min_wall_gap;

    fn box0_ranges() -> ObjectRanges {
        ObjectRanges::fixed(
            Dims {
                length: 0.142,
                width: 0.091,
                height: 0.041,
            },
            0.209,
            0.5,
        )
    }

    #[test]
    fn random_placement_yields_flat_interior_object() {
        let params = PhysicsParams::default();
        let state = reset(&params, &box0_ranges(), Placement::Random, 0.08, 7).unwrap();
        assert_eq!(state.object.resting_face, RestingFace::Flat);
        assert_eq!(state.object.pitch, 0.0);
        assert!((state.object.dims.length - 0.142).abs() < 1e-12);
        assert!((state.object.mass - 0.209).abs() < 1e-12);
        assert!(min_wall_gap(&state) >= 0.0);
        assert!(!state.held);
    }

    #[test]
    fn equal_seeds_give_bitwise_equal_states() {
        let params = PhysicsParams::default();
        let a = reset(&params, &ObjectRanges::default(), Placement::Random, 0.08, 7).unwrap();
        let b = reset(&params, &ObjectRanges::default(), Placement::Random, 0.08, 7).unwrap();
        assert_eq!(a, b);
        let c = reset(&params, &ObjectRanges::default(), Placement::Random, 0.08, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn close_to_wall_places_within_a_centimeter() {
        let params = PhysicsParams::default();
        for seed in 0..25 {
            let state = reset(
                &params,
                &ObjectRanges::default(),
                Placement::CloseToWall,
                0.08,
                seed,
            )
            .unwrap();
            let gap = min_wall_gap(&state);
            assert!(
                (0.0..=0.010).contains(&gap),
                "seed {seed}: wall gap {gap}"
            );
        }
    }

    #[test]
    fn oversized_object_is_unplaceable() {
        let params = PhysicsParams::default();
        let ranges = ObjectRanges {
            length: (0.5, 0.5),
            ..ObjectRanges::default()
        };
        let err = reset(&params, &ranges, Placement::Random, 0.08, 1).unwrap_err();
        assert!(err.to_string().contains("unplaceable"));
    }
}
