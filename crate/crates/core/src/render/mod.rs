//! Forward splatting of color and one-hot semantic channels.
//!
//! [`render`] is the tile-based rasterizer. [`render_bruteforce`] walks
//! every projected Gaussian at every pixel and is kept as the reference the
//! tiled path is checked against. Both share [`project_gaussian`] and the
//! per-pixel compositing loop, so they differ only in which splats each
//! pixel is offered.

mod project;
mod raster;

pub use project::{project_gaussian, ProjectedGaussian};
pub use raster::{render, render_bruteforce};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Raster;

/// Per-sample alpha clamp.
pub const MAX_ALPHA: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderSettings {
    pub tile_size: usize,
    /// Samples with smaller alpha are skipped.
    pub alpha_min: f64,
    /// A pixel stops accumulating once its transmittance drops below this.
    pub transmittance_stop: f64,
    /// Added to the diagonal of every 2D covariance, in pixels².
    pub low_pass: f64,
    pub background: [f64; 3],
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            tile_size: 16,
            alpha_min: 1.0 / 255.0,
            transmittance_stop: 1e-4,
            low_pass: 0.3,
            background: [0.0; 3],
        }
    }
}

impl RenderSettings {
    pub fn validate(&self) -> Result<()> {
        if self.tile_size == 0 {
            return Err(Error::invalid("tile_size must be at least 1"));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min < 1.0) {
            return Err(Error::invalid(format!("alpha_min {} outside (0, 1)", self.alpha_min)));
        }
        if !(0.0..1.0).contains(&self.transmittance_stop) {
            return Err(Error::invalid(format!(
                "transmittance_stop {} outside [0, 1)",
                self.transmittance_stop
            )));
        }
        if !(self.low_pass >= 0.0 && self.low_pass.is_finite()) {
            return Err(Error::invalid("low_pass must be finite and non-negative"));
        }
        if self.background.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("background color must be finite"));
        }
        Ok(())
    }
}

/// Output of one render. `semantic` is absent for a color-only render
/// (bank size 0).
#[derive(Debug, Clone, PartialEq)]
pub struct RenderBuffers {
    /// `H × W × 3`.
    pub color: Raster<f32>,
    /// `H × W × M` blended one-hot weights, not renormalized.
    pub semantic: Option<Raster<f32>>,
    /// `H × W × 1` residual transmittance.
    pub transmittance: Raster<f32>,
}

impl RenderBuffers {
    pub fn width(&self) -> usize {
        self.color.width()
    }

    pub fn height(&self) -> usize {
        self.color.height()
    }

    pub fn bank_size(&self) -> usize {
        self.semantic.as_ref().map_or(0, Raster::channels)
    }
}
