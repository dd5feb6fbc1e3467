//! Shared domain types and the numeric kernels the renderer builds on.

mod camera;
mod gaussian;
mod raster;
pub(crate) mod sh;

pub use camera::Camera;
pub use gaussian::{build_covariance, rotation_matrix, GaussianPrimitive};
pub use raster::Raster;
pub use sh::{eval_sh, sh_coeff_count, SH_C0};
