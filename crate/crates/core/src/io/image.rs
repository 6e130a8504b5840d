//! Portable graymap/pixmap writers and the tiled Q-map visualization.

use std::io::Write;
use std::path::Path;

use crate::agents::{Primitive, QMapSet};
use crate::perception::{HeightMap, MaskSet, GRID, K_ROTATIONS};

pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    write!(f, "P5\n{} {}\n255\n", img.width, img.height)?;
    f.write_all(&img.data)
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    write!(f, "P6\n{} {}\n255\n", img.width, img.height)?;
    f.write_all(&img.data)
}

/// Height map as an 8-bit grayscale image, black at the table surface.
pub fn heightmap_image(map: &HeightMap) -> GrayImage {
    let max = map.max_value().max(1e-6);
    GrayImage {
        width: GRID,
        height: GRID,
        data: map
            .data()
            .iter()
            .map(|&v| ((v / max).clamp(0.0, 1.0) * 255.0) as u8)
            .collect(),
    }
}

const SEP: usize = 1;

fn tile_origin(row: usize, col: usize) -> (usize, usize) {
    (col * (GRID + SEP), row * (GRID + SEP))
}

fn tiled_dims(rows: usize, cols: usize) -> (usize, usize) {
    (
        cols * GRID + (cols - 1) * SEP,
        rows * GRID + (rows - 1) * SEP,
    )
}

/// Q maps tiled one row per primitive and one column per rotation,
/// min-max normalized per primitive, with the global argmax pixel of each
/// primitive marked in red.
pub fn qmaps_tile_image(q: &QMapSet) -> RgbImage {
    let (width, height) = tiled_dims(Primitive::COUNT, K_ROTATIONS);
    let mut data = vec![40u8; width * height * 3];
    for (row, phi) in Primitive::ALL.into_iter().enumerate() {
        let mut lo = f32::INFINITY;
        let mut hi = f32::NEG_INFINITY;
        for i in 0..K_ROTATIONS {
            for &v in q.plane(i, phi) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        let span = (hi - lo).max(1e-9);
        let mut best = (f32::NEG_INFINITY, 0usize, 0usize, 0usize);
        for i in 0..K_ROTATIONS {
            let (ox, oy) = tile_origin(row, i);
            let plane = q.plane(i, phi);
            for y in 0..GRID {
                for x in 0..GRID {
                    let v = plane[y * GRID + x];
                    if v > best.0 {
                        best = (v, i, x, y);
                    }
                    let g = (((v - lo) / span) * 255.0) as u8;
                    let p = ((oy + y) * width + ox + x) * 3;
                    data[p] = g;
                    data[p + 1] = g;
                    data[p + 2] = g;
                }
            }
        }
        // Red cross on the argmax pixel.
        let (_, bi, bx, by) = best;
        let (ox, oy) = tile_origin(row, bi);
        for d in -2i32..=2 {
            for (mx, my) in [(d, 0), (0, d)] {
                let x = bx as i32 + mx;
                let y = by as i32 + my;
                if (0..GRID as i32).contains(&x) && (0..GRID as i32).contains(&y) {
                    let p = ((oy + y as usize) * width + ox + x as usize) * 3;
                    data[p] = 255;
                    data[p + 1] = 0;
                    data[p + 2] = 0;
                }
            }
        }
    }
    RgbImage {
        width,
        height,
        data,
    }
}

/// Admissibility masks tiled like the Q maps: white admissible.
pub fn masks_tile_image(masks: &MaskSet) -> GrayImage {
    let (width, height) = tiled_dims(Primitive::COUNT, K_ROTATIONS);
    let mut data = vec![40u8; width * height];
    for (row, phi) in Primitive::ALL.into_iter().enumerate() {
        for i in 0..K_ROTATIONS {
            let (ox, oy) = tile_origin(row, i);
            let mask = masks.mask(i, phi.mask_channel());
            for y in 0..GRID {
                for x in 0..GRID {
                    data[(oy + y) * width + ox + x] =
                        if mask[y * GRID + x] { 255 } else { 0 };
                }
            }
        }
    }
    GrayImage {
        width,
        height,
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::{compute_masks, render_height_map, MaskParams};
    use crate::sim::test_support::flat_box_at;

    #[test]
    fn qmap_tiling_has_48_tiles_and_an_argmax_mark() {
        let q = QMapSet::from_values(
            (0..QMapSet::ENTRIES).map(|i| (i % 977) as f32).collect(),
        );
        let img = qmaps_tile_image(&q);
        assert_eq!(img.width, 16 * 64 + 15);
        assert_eq!(img.height, 3 * 64 + 2);
        // Some pixel is pure red.
        assert!(img
            .data
            .chunks(3)
            .any(|c| c == [255, 0, 0]));
    }

    #[test]
    fn pgm_and_ppm_round_trip_headers() {
        let dir = tempfile::tempdir().unwrap();
        let map = render_height_map(&flat_box_at(0.2, 0.2, 0.1));
        let gray = heightmap_image(&map);
        let path = dir.path().join("h.pgm");
        write_pgm(&path, &gray).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5\n64 64\n255\n"));
        assert_eq!(bytes.len(), 13 + 64 * 64);

        let masks = compute_masks(&map, &MaskParams::default());
        let tiles = masks_tile_image(&masks);
        let path = dir.path().join("m.pgm");
        write_pgm(&path, &tiles).unwrap();
        assert!(std::fs::read(&path).unwrap().len() > tiles.width);
    }
}
