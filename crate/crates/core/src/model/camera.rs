use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pinhole camera. Camera frame is x right, y down, z forward; a point
/// projects to `(fx·x/z + cx, fy·y/z + cy)` and pixel `(i, j)` has its
/// center at `(i + 0.5, j + 0.5)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    /// Row-major rigid transform.
    pub world_to_camera: [[f64; 4]; 4],
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub near: f64,
    pub far: f64,
}

impl Camera {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        world_to_camera: [[f64; 4]; 4],
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
        near: f64,
        far: f64,
    ) -> Result<Self> {
        let cam = Self {
            world_to_camera,
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            near,
            far,
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Camera at `eye` looking at `target`, with `up` mapped to image-up.
    /// Principal point at the image center.
    #[allow(clippy::too_many_arguments)]
    pub fn look_at(
        eye: [f64; 3],
        target: [f64; 3],
        up: [f64; 3],
        focal: f64,
        width: u32,
        height: u32,
        near: f64,
        far: f64,
    ) -> Result<Self> {
        let eye_v = Vector3::from(eye);
        let forward = (Vector3::from(target) - eye_v)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::invalid("eye and target coincide"))?;
        let right = forward
            .cross(&Vector3::from(up))
            .try_normalize(1e-12)
            .ok_or_else(|| Error::invalid("up is parallel to the view direction"))?;
        let down = forward.cross(&right);
        let rot = Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        let t = -(rot * eye_v);
        let mut m = [[0.0; 4]; 4];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] = rot[(r, c)];
            }
            m[r][3] = t[r];
        }
        m[3][3] = 1.0;
        Self::new(m, focal, focal, width as f64 / 2.0, height as f64 / 2.0, width, height, near, far)
    }

    pub fn validate(&self) -> Result<()> {
        let scalars = [self.fx, self.fy, self.cx, self.cy, self.near, self.far];
        if scalars.iter().chain(self.world_to_camera.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("camera has non-finite entries"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("camera resolution must be positive"));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(Error::invalid("focal lengths must be positive"));
        }
        if !(self.near > 0.0 && self.near < self.far) {
            return Err(Error::invalid(format!("need 0 < near < far, got {} / {}", self.near, self.far)));
        }
        let r = self.rotation();
        let err = (r.transpose() * r - Matrix3::identity()).abs().max();
        if err > 1e-6 {
            return Err(Error::invalid(format!("rotation block not orthonormal (error {err:.2e})")));
        }
        if r.determinant() < 0.0 {
            return Err(Error::invalid("rotation block is a reflection"));
        }
        let bottom = self.world_to_camera[3];
        if bottom != [0.0, 0.0, 0.0, 1.0] {
            return Err(Error::invalid("last row of world_to_camera must be 0 0 0 1"));
        }
        Ok(())
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        let m = &self.world_to_camera;
        Matrix3::new(m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2])
    }

    pub fn translation(&self) -> Vector3<f64> {
        let m = &self.world_to_camera;
        Vector3::new(m[0][3], m[1][3], m[2][3])
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation().transpose() * self.translation())
    }

    pub fn to_camera(&self, p: Vector3<f64>) -> Vector3<f64> {
        self.rotation() * p + self.translation()
    }

    /// Pixel coordinates and depth of a world point, or `None` when behind
    /// the camera plane.
    pub fn project(&self, p: Vector3<f64>) -> Option<([f64; 2], f64)> {
        let c = self.to_camera(p);
        if c.z <= 0.0 {
            return None;
        }
        Some(([self.fx * c.x / c.z + self.cx, self.fy * c.y / c.z + self.cy], c.z))
    }
}
