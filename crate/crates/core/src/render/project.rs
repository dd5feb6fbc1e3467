use nalgebra::{Matrix2x3, Vector3};

use super::RenderSettings;
use crate::model::sh::eval_sh_unchecked;
use crate::model::{Camera, GaussianPrimitive};

/// A Gaussian in screen space, ready for compositing.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedGaussian {
    /// Pixels.
    pub mean2d: [f64; 2],
    /// Symmetric 2D covariance `(xx, xy, yy)` including the low-pass term.
    pub cov2d: [f64; 3],
    /// Inverse of `cov2d`, same layout.
    pub conic: [f64; 3],
    /// Camera-frame z.
    pub depth: f64,
    pub color: [f64; 3],
    pub opacity: f64,
    pub semantic_index: u32,
    pub primitive_id: usize,
    /// Inclusive pixel rectangle `[x0, y0, x1, y1]` (clipped to the image)
    /// outside which alpha is below `alpha_min`.
    pub pixel_rect: [usize; 4],
}

impl ProjectedGaussian {
    /// Unclamped-to-0.99 alpha `o · exp(-½ dᵀ Σ⁻¹ d)` at a pixel center.
    #[inline]
    pub fn alpha_at(&self, px: f64, py: f64) -> f64 {
        let dx = px - self.mean2d[0];
        let dy = py - self.mean2d[1];
        let [a, b, c] = self.conic;
        let power = -0.5 * (a * dx * dx + 2.0 * b * dx * dy + c * dy * dy);
        if power > 0.0 {
            return 0.0;
        }
        self.opacity * power.exp()
    }
}

/// EWA projection of one Gaussian. Returns `None` when the center's depth is
/// outside `[near, far]`, the opacity can never reach `alpha_min`, or the
/// region where alpha reaches `alpha_min` misses every pixel center.
///
/// The primitive must already be valid (see [`GaussianPrimitive::validate`]).
pub fn project_gaussian(
    g: &GaussianPrimitive,
    primitive_id: usize,
    cam: &Camera,
    settings: &RenderSettings,
) -> Option<ProjectedGaussian> {
    let rot = cam.rotation();
    let world = Vector3::from(g.position.map(f64::from));
    let p = rot * world + cam.translation();
    let depth = p.z;
    if !(depth >= cam.near && depth <= cam.far) {
        return None;
    }
    let opacity = g.opacity as f64;
    if opacity < settings.alpha_min {
        return None;
    }

    let (fx, fy) = (cam.fx, cam.fy);
    let inv_z = 1.0 / depth;
    let jac = Matrix2x3::new(fx * inv_z, 0.0, -fx * p.x * inv_z * inv_z, 0.0, fy * inv_z, -fy * p.y * inv_z * inv_z);
    let t = jac * rot;
    let cov = t * g.covariance() * t.transpose();
    let xx = cov[(0, 0)] + settings.low_pass;
    let yy = cov[(1, 1)] + settings.low_pass;
    let xy = 0.5 * (cov[(0, 1)] + cov[(1, 0)]);
    let det = xx * yy - xy * xy;
    if !(det > 0.0 && det.is_finite()) {
        return None;
    }
    let conic = [yy / det, -xy / det, xx / det];

    let mean2d = [fx * p.x * inv_z + cam.cx, fy * p.y * inv_z + cam.cy];

    // α ≥ alpha_min  ⇔  dᵀ Σ⁻¹ d ≤ 2 ln(o / alpha_min); the ellipse's
    // bounding box has half-widths sqrt(q · Σxx), sqrt(q · Σyy).
    let q = 2.0 * (opacity / settings.alpha_min).ln();
    let pad = |e: f64| e * (1.0 + 1e-9) + 1e-6;
    let ex = pad((q * xx).sqrt());
    let ey = pad((q * yy).sqrt());
    let x0 = (mean2d[0] - ex - 0.5).ceil().max(0.0);
    let y0 = (mean2d[1] - ey - 0.5).ceil().max(0.0);
    let x1 = (mean2d[0] + ex - 0.5).floor().min(cam.width as f64 - 1.0);
    let y1 = (mean2d[1] + ey - 0.5).floor().min(cam.height as f64 - 1.0);
    if !(x0 <= x1 && y0 <= y1) {
        return None;
    }

    let center = cam.center();
    let dir = (world - center).try_normalize(0.0).unwrap_or(Vector3::z());
    let degree = g.sh_degree().unwrap_or(0);
    let color = eval_sh_unchecked(&g.sh, [dir.x, dir.y, dir.z], degree);

    Some(ProjectedGaussian {
        mean2d,
        cov2d: [xx, xy, yy],
        conic,
        depth,
        color,
        opacity,
        semantic_index: g.semantic_index,
        primitive_id,
        pixel_rect: [x0 as usize, y0 as usize, x1 as usize, y1 as usize],
    })
}
