//! Per-episode domain randomization: object geometry and physical
//! parameters for the simulator, observation noise for the camera model.

use serde::{Deserialize, Serialize};

use crate::perception::NoiseSpec;
use crate::sim::ObjectRanges;

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct DomainRandomizationSpec {
    pub object: ObjectRanges,
    pub noise: NoiseSpec,
}

impl DomainRandomizationSpec {
    pub fn validate(&self) -> Result<(), String> {
        self.object.validate().map_err(|e| e.to_string())?;
        self.noise.validate()
    }
}
