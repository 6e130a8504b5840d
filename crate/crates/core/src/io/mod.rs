//! File formats: images, metric logs, episode records.

mod image;
mod records;

pub use image::{
    heightmap_image, masks_tile_image, qmaps_tile_image, write_pgm, write_ppm, GrayImage,
    RgbImage,
};
pub use records::{
    append_episode_records, append_metrics, read_episode_records, read_metrics, RecordError,
};
