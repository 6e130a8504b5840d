//! Orthographic top-down height rendering.

use serde::{Deserialize, Serialize};

use crate::sim::{Vec2, WorkspaceState, WALL_SIDE};

/// Grid side length, pixels.
pub const GRID: usize = 64;

/// Meters per pixel: the 44.8 cm workspace over 64 pixels.
pub const RESOLUTION: f64 = WALL_SIDE / GRID as f64;

/// Number of discrete end-effector rotations.
pub const K_ROTATIONS: usize = 16;

/// Rotation angle of stack index `i`.
pub fn rotation_angle(i: usize) -> f64 {
    std::f64::consts::TAU * i as f64 / K_ROTATIONS as f64
}

/// Height above the table surface per pixel, row-major, pixel (x, y) at
/// workspace point (x, y) * RESOLUTION.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightMap {
    data: Vec<f32>,
}

impl HeightMap {
    pub fn zeros() -> Self {
        Self {
            data: vec![0.0; GRID * GRID],
        }
    }

    pub fn from_data(data: Vec<f32>) -> Self {
        assert_eq!(data.len(), GRID * GRID);
        Self { data }
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * GRID + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * GRID + x] = v;
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn max_value(&self) -> f32 {
        self.data.iter().copied().fold(0.0, f32::max)
    }
}

/// Render the object's top surface into a height map. The end effector is
/// not drawn (the robot images the scene from a retracted pose); a held
/// object has left the table, so the map is empty.
///
/// Edge pixels carry coverage-weighted heights (4x4 supersampling), so the
/// summed footprint area is unbiased regardless of how the object straddles
/// the grid. Only settled states are rendered; the high-level agent observes
/// between primitives.
pub fn render_height_map(state: &WorkspaceState) -> HeightMap {
    debug_assert!(state.held || state.object.is_settled());
    let mut map = HeightMap::zeros();
    if state.held {
        return map;
    }
    let fp = state.object.footprint();
    let top = state.object.top_height();
    const SS: usize = 4;
    for py in 0..GRID {
        for px in 0..GRID {
            let mut inside = 0u32;
            for sy in 0..SS {
                for sx in 0..SS {
                    let ox = (sx as f64 + 0.5) / SS as f64 - 0.5;
                    let oy = (sy as f64 + 0.5) / SS as f64 - 0.5;
                    let world = Vec2::new(
                        (px as f64 + ox) * RESOLUTION,
                        (py as f64 + oy) * RESOLUTION,
                    );
                    if fp.contains(world) {
                        inside += 1;
                    }
                }
            }
            if inside > 0 {
                let coverage = f64::from(inside) / (SS * SS) as f64;
                map.set(px, py, (top * coverage) as f32);
            }
        }
    }
    map
}

/// Footprint area implied by a rendered map, in pixels: coverage-weighted
/// sum relative to the object's top height.
pub fn footprint_pixels(map: &HeightMap, top: f64) -> f64 {
    map.data().iter().map(|&v| f64::from(v)).sum::<f64>() / top
}

/// Distance from each pixel's workspace point to the nearest wall, meters.
/// Constant scene geometry; the high-level network receives it as a second
/// input channel so pixel values can be judged relative to the walls.
pub fn wall_distance_map() -> HeightMap {
    let mut map = HeightMap::zeros();
    for py in 0..GRID {
        for px in 0..GRID {
            let wx = px as f64 * RESOLUTION;
            let wy = py as f64 * RESOLUTION;
            let d = wx.min(wy).min(WALL_SIDE - wx).min(WALL_SIDE - wy);
            map.set(px, py, d.max(0.0) as f32);
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::test_support::flat_box_at;
    use crate::sim::{Dims, RestingFace};

    #[test]
    fn held_object_renders_empty() {
        let mut state = flat_box_at(0.2, 0.2, 0.0);
        state.held = true;
        state.ee.gripper = crate::sim::Gripper::Closed;
        let map = render_height_map(&state);
        assert!(map.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn flat_box_renders_footprint_at_its_height() {
        // 14.2 x 9.1 cm at 7 mm/px: about 20 x 13 pixels, 264 cells.
        let state = flat_box_at(0.224, 0.224, 0.0);
        let map = render_height_map(&state);
        let area = footprint_pixels(&map, 0.041);
        let analytic = 0.142 * 0.091 / (RESOLUTION * RESOLUTION);
        assert!(
            (area - analytic).abs() <= 0.10 * analytic,
            "{area} px vs analytic {analytic}"
        );
        assert!((map.max_value() - 0.041).abs() < 1e-6);
    }

    #[test]
    fn standing_box_renders_narrow_and_tall() {
        let mut state = flat_box_at(0.224, 0.224, 0.0);
        state.object.dims = Dims {
            length: 0.142,
            width: 0.041,
            height: 0.091,
        };
        state.object.resting_face = RestingFace::Standing;
        state.object.pitch = std::f64::consts::FRAC_PI_2;
        let map = render_height_map(&state);
        let area = footprint_pixels(&map, 0.091);
        let analytic = 0.142 * 0.041 / (RESOLUTION * RESOLUTION);
        assert!(
            (area - analytic).abs() <= 0.10 * analytic,
            "{area} px vs analytic {analytic}"
        );
        assert!((map.max_value() - 0.091).abs() < 1e-6);
    }

    #[test]
    fn wall_distance_is_zeroish_at_rim_and_large_at_center() {
        let map = wall_distance_map();
        assert!(map.get(0, 30) < 0.004);
        assert!(map.get(32, 32) > 0.2);
    }
}
