//! The K-rotation observation stack and the pixel-to-workspace mapping.
//!
//! Rotated map i is sampled so that a primitive directed along workspace yaw
//! theta_i = 2*pi*i/K points along +x of that frame. Selecting pixel (x, y)
//! in rotation i therefore fixes the full starting pose (x, y, theta_i).

use super::heightmap::{rotation_angle, HeightMap, GRID, K_ROTATIONS, RESOLUTION};

/// Pixel-space rotation center: the grid maps onto itself under quarter
/// turns about this point.
const CENTER: f64 = (GRID as f64 - 1.0) / 2.0;

#[derive(Debug, thiserror::Error)]
pub enum PerceptionError {
    #[error("unreachable: pixel ({x}, {y}) of rotation {i} leaves the workspace")]
    Unreachable { x: usize, y: usize, i: usize },
}

/// Workspace start pose produced by the high-level action.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StartPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
}

/// Bilinear sample with zero fill outside the grid.
fn sample(map: &HeightMap, fx: f64, fy: f64) -> f32 {
    if !(-1.0..GRID as f64).contains(&fx) || !(-1.0..GRID as f64).contains(&fy) {
        return 0.0;
    }
    let x0 = fx.floor();
    let y0 = fy.floor();
    let tx = (fx - x0) as f32;
    let ty = (fy - y0) as f32;
    let at = |x: f64, y: f64| -> f32 {
        if x < 0.0 || y < 0.0 || x >= GRID as f64 || y >= GRID as f64 {
            0.0
        } else {
            map.get(x as usize, y as usize)
        }
    };
    let v00 = at(x0, y0);
    let v10 = at(x0 + 1.0, y0);
    let v01 = at(x0, y0 + 1.0);
    let v11 = at(x0 + 1.0, y0 + 1.0);
    let top = v00 * (1.0 - tx) + v10 * tx;
    let bot = v01 * (1.0 - tx) + v11 * tx;
    (top * (1.0 - ty) + bot * ty).max(0.0)
}

/// Source pixel coordinates feeding pixel (x, y) of rotation `i`.
fn source_coords(x: f64, y: f64, i: usize) -> (f64, f64) {
    let (s, c) = rotation_angle(i).sin_cos();
    let dx = x - CENTER;
    let dy = y - CENTER;
    (CENTER + c * dx - s * dy, CENTER + s * dx + c * dy)
}

/// Rotate one map to frame `i` with bilinear interpolation, zero fill, and
/// heights clamped non-negative.
pub fn rotate_map(map: &HeightMap, i: usize) -> HeightMap {
    if i.is_multiple_of(K_ROTATIONS) {
        return map.clone();
    }
    let mut out = HeightMap::zeros();
    for py in 0..GRID {
        for px in 0..GRID {
            let (sx, sy) = source_coords(px as f64, py as f64, i);
            out.set(px, py, sample(map, sx, sy));
        }
    }
    out
}

/// All K rotations of a source map. Index 0 is the source itself.
#[derive(Debug, Clone)]
pub struct HeightMapStack {
    pub maps: Vec<HeightMap>,
}

pub fn rotate_stack(map: &HeightMap) -> HeightMapStack {
    HeightMapStack {
        maps: (0..K_ROTATIONS).map(|i| rotate_map(map, i)).collect(),
    }
}

/// Map a pixel of rotation `i` to its workspace start pose. `z` comes from
/// the unrotated source map at the corresponding pixel, plus `clearance`.
pub fn pixel_to_pose(
    x: usize,
    y: usize,
    i: usize,
    source: &HeightMap,
    clearance: f64,
) -> Result<StartPose, PerceptionError> {
    let (sx, sy) = source_coords(x as f64, y as f64, i);
    if !(0.0..=(GRID - 1) as f64).contains(&sx) || !(0.0..=(GRID - 1) as f64).contains(&sy) {
        return Err(PerceptionError::Unreachable { x, y, i });
    }
    let h = source.get(sx.round() as usize, sy.round() as usize) as f64;
    Ok(StartPose {
        x: sx * RESOLUTION,
        y: sy * RESOLUTION,
        z: h + clearance,
        yaw: crate::sim::wrap_angle(rotation_angle(i)),
    })
}

/// Inverse of [`pixel_to_pose`] up to rounding; test and tooling helper.
pub fn pose_to_pixel(x_m: f64, y_m: f64, i: usize) -> (isize, isize) {
    let fx = x_m / RESOLUTION - CENTER;
    let fy = y_m / RESOLUTION - CENTER;
    let (s, c) = rotation_angle(i).sin_cos();
    // Inverse rotation.
    let px = CENTER + c * fx + s * fy;
    let py = CENTER - s * fx + c * fy;
    (px.round() as isize, py.round() as isize)
}
