//! Observation pipeline: orthographic height maps from simulator state,
//! domain-randomization corruption, the K-rotation stack, pixel-to-pose
//! mapping, and primitive admissibility masks.

mod heightmap;
mod masks;
mod noise;
mod rotate;

pub use heightmap::{
    footprint_pixels,
    render_height_map, rotation_angle, wall_distance_map, HeightMap, GRID, K_ROTATIONS,
    RESOLUTION,
};
pub use masks::{compute_masks, compute_masks_from_stack, MaskChannel, MaskParams, MaskSet};
pub use noise::{corrupt, NoiseSpec};
pub use rotate::{
    pixel_to_pose, pose_to_pixel, rotate_map, rotate_stack, HeightMapStack, PerceptionError,
    StartPose,
};

/// Start-pose clearance and mask settings grouped for the episode loop.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct PerceptionParams {
    pub mask: MaskParams,
    /// Added above the map height when lowering to a push/flip start, m.
    pub start_clearance: f64,
}

impl Default for PerceptionParams {
    fn default() -> Self {
        Self {
            mask: MaskParams::default(),
            start_clearance: 0.02,
        }
    }
}
