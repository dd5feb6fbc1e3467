//! Semantic index assignment for Gaussians.

use nalgebra::Vector3;

use crate::bank::SemanticIndexMap;
use crate::error::{Error, Result};
use crate::model::{Camera, GaussianPrimitive};

/// Gaussians predicted one per pixel per input view, stored view-major and
/// row-major inside each view: index `k·H·W + y·W + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelAlignedScene {
    pub gaussians: Vec<GaussianPrimitive>,
    pub views: usize,
    pub height: usize,
    pub width: usize,
    pub source_views: Vec<u32>,
}

impl PixelAlignedScene {
    pub fn new(gaussians: Vec<GaussianPrimitive>, views: usize, height: usize, width: usize, source_views: Vec<u32>) -> Result<Self> {
        if gaussians.len() != views * height * width {
            return Err(Error::invalid(format!(
                "{} gaussians do not fill a {views}x{height}x{width} grid",
                gaussians.len()
            )));
        }
        if source_views.len() != views {
            return Err(Error::invalid("one source view index per grid view required"));
        }
        Ok(Self {
            gaussians,
            views,
            height,
            width,
            source_views,
        })
    }
}

/// Copies `S_k(x, y)` onto the Gaussian born at pixel `(x, y)` of view `k`.
pub fn attach_pixel_aligned(scene: &PixelAlignedScene, index_maps: &[SemanticIndexMap]) -> Result<Vec<GaussianPrimitive>> {
    if index_maps.len() != scene.views {
        return Err(Error::invalid(format!(
            "{} index maps for {} views",
            index_maps.len(),
            scene.views
        )));
    }
    if scene.gaussians.len() != scene.views * scene.height * scene.width {
        return Err(Error::invalid("scene gaussian count does not match its layout"));
    }
    for map in index_maps {
        if map.values.width() != scene.width || map.values.height() != scene.height || map.values.channels() != 1 {
            return Err(Error::invalid(format!(
                "index map {} is {}x{}, grid is {}x{}",
                map.view_index,
                map.values.width(),
                map.values.height(),
                scene.width,
                scene.height
            )));
        }
    }
    let per_view = scene.height * scene.width;
    Ok(scene
        .gaussians
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let mut g = g.clone();
            g.semantic_index = index_maps[i / per_view].values.data()[i % per_view];
            g
        })
        .collect())
}

/// Index for Gaussians that are not pixel aligned: project the center into
/// every view and take the label under it from the nearest view (by depth)
/// that sees it. Unseen Gaussians become background.
pub fn assign_by_projection(
    gaussians: &[GaussianPrimitive],
    cameras: &[Camera],
    index_maps: &[SemanticIndexMap],
) -> Result<Vec<GaussianPrimitive>> {
    if cameras.len() != index_maps.len() {
        return Err(Error::invalid(format!(
            "{} cameras for {} index maps",
            cameras.len(),
            index_maps.len()
        )));
    }
    for (cam, map) in cameras.iter().zip(index_maps) {
        if cam.width as usize != map.values.width() || cam.height as usize != map.values.height() {
            return Err(Error::invalid(format!(
                "camera for view {} is {}x{}, its index map is {}x{}",
                map.view_index,
                cam.width,
                cam.height,
                map.values.width(),
                map.values.height()
            )));
        }
    }
    Ok(gaussians
        .iter()
        .map(|g| {
            let p = Vector3::from(g.position.map(f64::from));
            let mut best: Option<(f64, u32)> = None;
            for (cam, map) in cameras.iter().zip(index_maps) {
                let Some(([u, v], depth)) = cam.project(p) else { continue };
                if depth < cam.near || depth > cam.far {
                    continue;
                }
                let (x, y) = (u.floor(), v.floor());
                if x < 0.0 || y < 0.0 || x >= cam.width as f64 || y >= cam.height as f64 {
                    continue;
                }
                if best.is_none_or(|(d, _)| depth < d) {
                    best = Some((depth, map.values.get(x as usize, y as usize, 0)));
                }
            }
            let mut g = g.clone();
            g.semantic_index = best.map_or(0, |b| b.1);
            g
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Raster;

    fn gaussian_at(p: [f32; 3]) -> GaussianPrimitive {
        GaussianPrimitive::with_rgb(p, [0.1; 3], [1.0, 0.0, 0.0, 0.0], 0.8, [0.2, 0.4, 0.6])
    }

    fn map(view: u32, w: usize, h: usize, values: Vec<u32>) -> SemanticIndexMap {
        SemanticIndexMap {
            view_index: view,
            values: Raster::from_vec(w, h, 1, values).unwrap(),
        }
    }

    #[test]
    fn pixel_aligned_copy() {
        let gs: Vec<_> = (0..8).map(|i| gaussian_at([i as f32, 0.0, 1.0])).collect();
        let scene = PixelAlignedScene::new(gs.clone(), 2, 2, 2, vec![0, 1]).unwrap();
        let maps = [map(0, 2, 2, vec![3, 0, 1, 1]), map(1, 2, 2, vec![0, 2, 2, 5])];
        let out = attach_pixel_aligned(&scene, &maps).unwrap();
        let idx: Vec<u32> = out.iter().map(|g| g.semantic_index).collect();
        assert_eq!(idx, vec![3, 0, 1, 1, 0, 2, 2, 5]);
        for (a, b) in out.iter().zip(&gs) {
            assert_eq!(a.position, b.position);
            assert_eq!(a.sh, b.sh);
        }
    }

    #[test]
    fn pixel_aligned_rejects_mismatch() {
        let gs: Vec<_> = (0..4).map(|_| gaussian_at([0.0; 3])).collect();
        let scene = PixelAlignedScene::new(gs, 1, 2, 2, vec![0]).unwrap();
        assert!(attach_pixel_aligned(&scene, &[map(0, 1, 4, vec![0; 4])]).is_err());
        assert!(attach_pixel_aligned(&scene, &[]).is_err());
        assert!(PixelAlignedScene::new(vec![], 1, 2, 2, vec![0]).is_err());
    }

    #[test]
    fn projection_prefers_nearest_view() {
        // cameras on the z axis looking at the origin from depth 2 and 3
        let near = Camera::look_at([0.0, 0.0, 2.0], [0.0; 3], [0.0, 1.0, 0.0], 10.0, 4, 4, 0.1, 10.0).unwrap();
        let far = Camera::look_at([0.0, 0.0, -3.0], [0.0; 3], [0.0, 1.0, 0.0], 10.0, 4, 4, 0.1, 10.0).unwrap();
        // the origin lands on (2, 2) in both views
        let maps = [map(0, 4, 4, vec![4; 16]), map(1, 4, 4, vec![7; 16])];
        let out = assign_by_projection(&[gaussian_at([0.0; 3])], &[far.clone(), near.clone()], &[maps[1].clone(), maps[0].clone()]).unwrap();
        assert_eq!(out[0].semantic_index, 4);

        // only one view sees the point
        let mut five = vec![0; 16];
        five[2 * 4 + 2] = 5;
        let out = assign_by_projection(&[gaussian_at([0.0; 3])], &[near.clone()], &[map(0, 4, 4, five)]).unwrap();
        assert_eq!(out[0].semantic_index, 5);

        // behind the camera
        let out = assign_by_projection(&[gaussian_at([0.0, 0.0, 5.0])], &[near], &[maps[0].clone()]).unwrap();
        assert_eq!(out[0].semantic_index, 0);
    }
}
