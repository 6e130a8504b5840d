//! Observation corruption for domain randomization: per-pixel Gaussian noise
//! and rectangular dropout regions standing in for depth-camera reflections.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::heightmap::{HeightMap, GRID};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Per-pixel Gaussian noise standard deviation, m.
    pub gaussian_sigma: f64,
    /// Inclusive range for the number of dropout rectangles.
    pub dropout_regions: (u32, u32),
    /// Inclusive range for dropout rectangle side length, px.
    pub dropout_size: (u32, u32),
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            gaussian_sigma: 0.002,
            dropout_regions: (0, 2),
            dropout_size: (3, 8),
        }
    }
}

impl NoiseSpec {
    /// No corruption at all; [`corrupt`] becomes the identity.
    pub const NONE: Self = Self {
        gaussian_sigma: 0.0,
        dropout_regions: (0, 0),
        dropout_size: (1, 1),
    };

    pub fn validate(&self) -> Result<(), String> {
        if self.gaussian_sigma < 0.0 {
            return Err("gaussian_sigma must be >= 0".into());
        }
        if self.dropout_regions.0 > self.dropout_regions.1 {
            return Err("dropout_regions range is reversed".into());
        }
        if self.dropout_size.0 > self.dropout_size.1 || self.dropout_size.1 as usize > GRID {
            return Err("dropout_size range must be ordered and fit the grid".into());
        }
        Ok(())
    }
}

fn sample_inclusive(rng: &mut ChaCha8Rng, (lo, hi): (u32, u32)) -> u32 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Apply noise then dropout, deterministically under `seed`. Heights are
/// clamped at zero after the noise.
pub fn corrupt(map: &HeightMap, spec: &NoiseSpec, seed: u64) -> HeightMap {
    let mut out = map.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if spec.gaussian_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.gaussian_sigma).expect("validated sigma");
        for v in out.data_mut() {
            *v = (*v + normal.sample(&mut rng) as f32).max(0.0);
        }
    }
    let regions = sample_inclusive(&mut rng, spec.dropout_regions);
    for _ in 0..regions {
        let w = sample_inclusive(&mut rng, spec.dropout_size) as usize;
        let h = sample_inclusive(&mut rng, spec.dropout_size) as usize;
        let x0 = rng.random_range(0..=(GRID - w));
        let y0 = rng.random_range(0..=(GRID - h));
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                out.set(x, y, 0.0);
            }
        }
    }
    out
}
