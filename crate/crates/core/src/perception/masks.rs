//! Primitive admissibility masks.
//!
//! Grasp actions start on the object: pixels above the height threshold.
//! Push and flip actions start next to it: a dilation band around the grasp
//! mask. Masks are computed per rotation on the rotated maps so that masked
//! Q maps line up index for index.

use serde::{Deserialize, Serialize};

use super::heightmap::{HeightMap, GRID, K_ROTATIONS};
use super::rotate::HeightMapStack;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MaskParams {
    /// Height threshold above which a pixel belongs to the object, m.
    pub height_threshold: f64,
    /// Dilation disk radius, px.
    pub dilation_radius: u32,
}

impl Default for MaskParams {
    fn default() -> Self {
        Self {
            height_threshold: 0.015,
            dilation_radius: 6,
        }
    }
}

/// Which admissibility grid a primitive draws on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskChannel {
    /// On the object.
    Footprint,
    /// Around the object.
    Band,
}

/// Per-rotation admissibility grids.
#[derive(Debug, Clone)]
pub struct MaskSet {
    footprint: Vec<Vec<bool>>,
    band: Vec<Vec<bool>>,
}

impl MaskSet {
    pub fn mask(&self, rotation: usize, channel: MaskChannel) -> &[bool] {
        match channel {
            MaskChannel::Footprint => &self.footprint[rotation],
            MaskChannel::Band => &self.band[rotation],
        }
    }

    pub fn admissible(&self, rotation: usize, channel: MaskChannel, x: usize, y: usize) -> bool {
        self.mask(rotation, channel)[y * GRID + x]
    }

    /// Total number of admissible entries across rotations and channels,
    /// counting the band once per band-driven primitive.
    pub fn admissible_count(&self, band_primitives: usize) -> usize {
        let f: usize = self
            .footprint
            .iter()
            .map(|m| m.iter().filter(|&&b| b).count())
            .sum();
        let b: usize = self
            .band
            .iter()
            .map(|m| m.iter().filter(|&&b| b).count())
            .sum();
        f + b * band_primitives
    }
}

fn threshold(map: &HeightMap, h: f64) -> Vec<bool> {
    map.data().iter().map(|&v| f64::from(v) > h).collect()
}

fn dilate_disk(mask: &[bool], radius: u32) -> Vec<bool> {
    let r = radius as isize;
    let mut offsets = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                offsets.push((dx, dy));
            }
        }
    }
    let mut out = vec![false; mask.len()];
    for y in 0..GRID as isize {
        for x in 0..GRID as isize {
            if !mask[y as usize * GRID + x as usize] {
                continue;
            }
            for &(dx, dy) in &offsets {
                let (nx, ny) = (x + dx, y + dy);
                if (0..GRID as isize).contains(&nx) && (0..GRID as isize).contains(&ny) {
                    out[ny as usize * GRID + nx as usize] = true;
                }
            }
        }
    }
    out
}

/// Masks for every rotation of an already-rotated observation stack.
pub fn compute_masks_from_stack(stack: &HeightMapStack, params: &MaskParams) -> MaskSet {
    let mut footprint = Vec::with_capacity(K_ROTATIONS);
    let mut band = Vec::with_capacity(K_ROTATIONS);
    for map in &stack.maps {
        let grasp = threshold(map, params.height_threshold);
        let dilated = dilate_disk(&grasp, params.dilation_radius);
        let ring: Vec<bool> = dilated
            .iter()
            .zip(&grasp)
            .map(|(&d, &g)| d && !g)
            .collect();
        footprint.push(grasp);
        band.push(ring);
    }
    MaskSet { footprint, band }
}

/// Masks straight from a source map (rotates internally).
pub fn compute_masks(map: &HeightMap, params: &MaskParams) -> MaskSet {
    compute_masks_from_stack(&super::rotate::rotate_stack(map), params)
}
