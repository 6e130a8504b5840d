//! Rotation and mask invariants over randomized scenes.

use flipgrasp::perception::{
    compute_masks, corrupt, pixel_to_pose, pose_to_pixel, render_height_map, rotate_map,
    wall_distance_map, HeightMap, MaskChannel, MaskParams, NoiseSpec, GRID, K_ROTATIONS,
};
use flipgrasp::sim::test_support::flat_box_at;
use flipgrasp::sim::{reset, ObjectRanges, PhysicsParams, Placement, WorkspaceState};
use proptest::prelude::*;

fn random_scene(seed: u64) -> WorkspaceState {
    reset(
        &PhysicsParams::default(),
        &ObjectRanges::default(),
        Placement::Random,
        0.08,
        seed,
    )
    .expect("placeable")
}

/// Pixels whose rotated source stays in bounds for rotation `i`.
fn valid_pixel(x: usize, y: usize, i: usize) -> bool {
    let c = (GRID - 1) as f64 / 2.0;
    let theta = std::f64::consts::TAU * i as f64 / K_ROTATIONS as f64;
    let (s, co) = theta.sin_cos();
    let dx = x as f64 - c;
    let dy = y as f64 - c;
    let sx = c + co * dx - s * dy;
    let sy = c + s * dx + co * dy;
    (0.0..=(GRID - 1) as f64).contains(&sx) && (0.0..=(GRID - 1) as f64).contains(&sy)
}

/// True when every set pixel of `a` lies within `tol` pixels of a set pixel
/// of `b`, restricted to rotation-valid pixels.
fn within_boundary_tolerance(a: &[bool], b: &[bool], i: usize, tol: isize) -> bool {
    for y in 0..GRID as isize {
        for x in 0..GRID as isize {
            if !a[y as usize * GRID + x as usize]
                || !valid_pixel(x as usize, y as usize, i)
            {
                continue;
            }
            let mut near = false;
            'search: for dy in -tol..=tol {
                for dx in -tol..=tol {
                    let (nx, ny) = (x + dx, y + dy);
                    if (0..GRID as isize).contains(&nx)
                        && (0..GRID as isize).contains(&ny)
                        && b[ny as usize * GRID + nx as usize]
                    {
                        near = true;
                        break 'search;
                    }
                }
            }
            if !near {
                return false;
            }
        }
    }
    true
}

/// Boolean-grid rotation by nearest neighbor, for the covariance check.
fn rotate_mask(mask: &[bool], i: usize) -> Vec<bool> {
    let mut as_map = HeightMap::zeros();
    for (idx, &b) in mask.iter().enumerate() {
        if b {
            as_map.data_mut()[idx] = 1.0;
        }
    }
    rotate_map(&as_map, i)
        .data()
        .iter()
        .map(|&v| v > 0.5)
        .collect()
}

#[test]
fn rotate_there_and_back_recovers_constant_regions() {
    for seed in 0..100u64 {
        let map = render_height_map(&random_scene(seed));
        for i in [1usize, 3, 5, 7] {
            let back = rotate_map(&rotate_map(&map, i), K_ROTATIONS - i);
            // Compare pixels at least 3 px from any height discontinuity
            // and inside the rotation-valid disk.
            let c = (GRID - 1) as f64 / 2.0;
            for y in 3..GRID - 3 {
                for x in 3..GRID - 3 {
                    let r = ((x as f64 - c).powi(2) + (y as f64 - c).powi(2)).sqrt();
                    if r > 28.0 {
                        continue;
                    }
                    let v = map.get(x, y);
                    let mut constant = true;
                    'scan: for dy in -3i32..=3 {
                        for dx in -3i32..=3 {
                            let n =
                                map.get((x as i32 + dx) as usize, (y as i32 + dy) as usize);
                            if (n - v).abs() > 1e-7 {
                                constant = false;
                                break 'scan;
                            }
                        }
                    }
                    if constant {
                        assert!(
                            (back.get(x, y) - v).abs() < 1e-6,
                            "seed {seed} i {i} pixel ({x},{y}): {} vs {v}",
                            back.get(x, y)
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn masks_are_rotation_covariant_within_one_pixel() {
    let params = MaskParams::default();
    for seed in 0..100u64 {
        let map = render_height_map(&random_scene(seed));
        let masks = compute_masks(&map, &params);
        let base = masks.mask(0, MaskChannel::Footprint).to_vec();
        for i in [2usize, 4, 9, 13] {
            let of_rotated = masks.mask(i, MaskChannel::Footprint);
            let rotated_mask = rotate_mask(&base, i);
            assert!(
                within_boundary_tolerance(of_rotated, &rotated_mask, i, 1),
                "seed {seed} rotation {i}: mask of rotated map escapes"
            );
            assert!(
                within_boundary_tolerance(&rotated_mask, of_rotated, i, 1),
                "seed {seed} rotation {i}: rotated mask escapes"
            );
        }
    }
}

#[test]
fn corrupt_with_identity_spec_is_identity_across_scenes() {
    for seed in 0..20u64 {
        let map = render_height_map(&random_scene(seed));
        assert_eq!(corrupt(&map, &NoiseSpec::NONE, seed), map);
    }
}

#[test]
fn wall_distance_channel_vanishes_only_at_the_rim() {
    let map = wall_distance_map();
    for y in 8..GRID - 8 {
        for x in 8..GRID - 8 {
            assert!(map.get(x, y) > 0.04);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pixel_pose_round_trip_stays_within_one_pixel(
        x in 8usize..56,
        y in 8usize..56,
        i in 0usize..K_ROTATIONS,
    ) {
        let map = HeightMap::zeros();
        prop_assume!(valid_pixel(x, y, i));
        let pose = pixel_to_pose(x, y, i, &map, 0.02).unwrap();
        let (px, py) = pose_to_pixel(pose.x, pose.y, i);
        prop_assert!((px - x as isize).abs() <= 1);
        prop_assert!((py - y as isize).abs() <= 1);
    }

    #[test]
    fn rendered_heights_are_finite_and_bounded(seed in 0u64..10_000) {
        let state = random_scene(seed);
        let map = render_height_map(&state);
        for &v in map.data() {
            prop_assert!(v.is_finite());
            prop_assert!(v >= 0.0);
            prop_assert!(f64::from(v) <= state.object.top_height() + 1e-6);
        }
    }

    #[test]
    fn scripted_scene_masks_never_overlap(seed in 0u64..10_000) {
        let map = render_height_map(&flat_box_at(
            0.15 + (seed % 13) as f64 * 0.01,
            0.15 + (seed % 7) as f64 * 0.02,
            seed as f64 * 0.37,
        ));
        let masks = compute_masks(&map, &MaskParams::default());
        for i in 0..K_ROTATIONS {
            let grasp = masks.mask(i, MaskChannel::Footprint);
            let band = masks.mask(i, MaskChannel::Band);
            for (g, b) in grasp.iter().zip(band) {
                prop_assert!(!(g & b));
            }
        }
    }
}
