use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::sh::sh_coeff_count;
use crate::error::{Error, Result};

/// One 3D Gaussian. Covariance is kept factored as `scale` + `rotation`
/// (quaternion `w, x, y, z`) so it is positive definite by construction.
///
/// `semantic_index` refers to a row of the semantic bank, 1-based; 0 means
/// background.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPrimitive {
    pub position: [f32; 3],
    pub opacity: f32,
    pub scale: [f32; 3],
    pub rotation: [f32; 4],
    /// `(degree + 1)²` RGB coefficients, DC term first.
    pub sh: Vec<[f32; 3]>,
    pub semantic_index: u32,
}

impl GaussianPrimitive {
    /// Flat-colored Gaussian (SH degree 0) from an RGB color in `[0, 1]`.
    pub fn with_rgb(position: [f32; 3], scale: [f32; 3], rotation: [f32; 4], opacity: f32, rgb: [f32; 3]) -> Self {
        let dc = rgb.map(|c| ((c as f64 - 0.5) / super::SH_C0) as f32);
        Self {
            position,
            opacity,
            scale,
            rotation,
            sh: vec![dc],
            semantic_index: 0,
        }
    }

    pub fn sh_degree(&self) -> Option<usize> {
        (0..=3).find(|&d| sh_coeff_count(d) == self.sh.len())
    }

    pub fn covariance(&self) -> Matrix3<f64> {
        covariance_unchecked(self.scale.map(f64::from), self.rotation.map(f64::from))
    }

    /// Checks the primitive's invariants, and `semantic_index <= bank_size`
    /// when a bank size is given.
    pub fn validate(&self, bank_size: Option<usize>) -> Result<()> {
        let finite = self.position.iter().chain(&self.scale).chain(&self.rotation).all(|v| v.is_finite())
            && self.opacity.is_finite()
            && self.sh.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("gaussian has non-finite fields"));
        }
        if !(0.0..=1.0).contains(&self.opacity) {
            return Err(Error::invalid(format!("opacity {} outside [0, 1]", self.opacity)));
        }
        if self.scale.iter().any(|&s| s <= 0.0) {
            return Err(Error::invalid(format!("scale {:?} not strictly positive", self.scale)));
        }
        let norm = self.rotation.iter().map(|&q| (q as f64).powi(2)).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!("rotation quaternion norm {norm} is not 1")));
        }
        if self.sh_degree().is_none() {
            return Err(Error::invalid(format!("{} SH coefficients is not a square <= 16", self.sh.len())));
        }
        if let Some(m) = bank_size {
            if self.semantic_index as usize > m {
                return Err(Error::invalid(format!(
                    "semantic index {} exceeds bank size {m}",
                    self.semantic_index
                )));
            }
        }
        Ok(())
    }
}

/// Rotation matrix of a `w, x, y, z` quaternion. The quaternion is normalized
/// first.
pub fn rotation_matrix(q: [f64; 4]) -> Matrix3<f64> {
    UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]))
        .to_rotation_matrix()
        .into_inner()
}

/// `Σ = R · diag(scale)² · Rᵀ`.
pub fn build_covariance(scale: [f64; 3], rotation: [f64; 4]) -> Result<Matrix3<f64>> {
    if scale.iter().chain(&rotation).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite scale or rotation"));
    }
    if scale.iter().any(|&s| s <= 0.0) {
        return Err(Error::invalid(format!("scale {scale:?} not strictly positive")));
    }
    if rotation.iter().all(|&q| q == 0.0) {
        return Err(Error::invalid("zero quaternion"));
    }
    Ok(covariance_unchecked(scale, rotation))
}

fn covariance_unchecked(scale: [f64; 3], rotation: [f64; 4]) -> Matrix3<f64> {
    let r = rotation_matrix(rotation);
    let rs = r * Matrix3::from_diagonal(&Vector3::from(scale));
    let cov = rs * rs.transpose();
    // exact symmetry
    (cov + cov.transpose()) * 0.5
}
