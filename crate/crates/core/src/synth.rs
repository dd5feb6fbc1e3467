//! Deterministic synthetic scene with an analytic answer key.
//!
//! A flat plane at depth `PLANE_DEPTH` is split into three objects along
//! pixel edges of the held-out camera. Two input cameras sit to either side,
//! translated by a whole number of pixels at the plane's depth, so their
//! pixel-aligned Gaussians land on the held-out camera's pixel-center
//! lattice. Each object gets one mask per input view whose embedding is the
//! planted bank vector plus seeded Gaussian noise.
//!
//! The canonical embeddings are mutually orthonormal and each has cosine
//! 1/3 with every planted bank vector, so a pure pixel of object `j` scores
//! `sigmoid(τ·2/3)` for query `j` and `sigmoid(-τ/3)` for the others.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::ViewAnnotation;
use crate::bank::{SemanticBank, SemanticIndexMap};
use crate::error::{Error, Result};
use crate::io::{self, AnnotationManifest, EmbeddingMatrix, ManifestView, MANIFEST_VERSION};
use crate::lift::PixelAlignedScene;
use crate::model::{Camera, GaussianPrimitive, Raster};

pub const PLANE_DEPTH: f64 = 4.0;
pub const OBJECTS: usize = 3;
const OBJECT_COLORS: [[f32; 3]; OBJECTS] = [[0.85, 0.3, 0.25], [0.3, 0.75, 0.35], [0.25, 0.4, 0.85]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub width: u32,
    pub height: u32,
    /// Focal length in pixels, shared by all cameras.
    pub focal: f64,
    /// Input cameras sit this many held-out pixels left and right.
    pub baseline_px: u32,
    pub embedding_dim: usize,
    /// Per-component standard deviation added to mask embeddings.
    pub noise: f64,
    pub opacity: f32,
    /// Gaussian scale as a fraction of the pixel footprint on the plane.
    pub footprint: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            focal: 64.0,
            baseline_px: 4,
            embedding_dim: 8,
            noise: 0.05,
            opacity: 0.95,
            footprint: 0.16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub config: SynthConfig,
    /// Rows are `e_1, e_2, e_3`.
    pub planted_bank: SemanticBank,
    pub canonicals: Vec<Vec<f32>>,
    pub input_cameras: Vec<Camera>,
    pub views: Vec<ViewAnnotation>,
    /// Semantic indices all 0.
    pub grid: PixelAlignedScene,
    /// Per input view, pixel → planted bank index (object id).
    pub planted_maps: Vec<SemanticIndexMap>,
    pub heldout: Camera,
    /// Ground truth in the held-out view, one mask per object.
    pub gt_masks: Vec<Raster<bool>>,
}

impl SyntheticScene {
    /// Query embedding for object `j` (0-based): the planted bank row.
    pub fn query(&self, j: usize) -> Vec<f32> {
        self.planted_bank.row(j).to_vec()
    }

    /// The grid with planted indices attached.
    pub fn labeled_gaussians(&self) -> Result<Vec<GaussianPrimitive>> {
        crate::lift::attach_pixel_aligned(&self.grid, &self.planted_maps)
    }
}

fn camera_at(x: f64, cfg: &SynthConfig) -> Result<Camera> {
    let m = [[1.0, 0.0, 0.0, -x], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
    Camera::new(
        m,
        cfg.focal,
        cfg.focal,
        cfg.width as f64 / 2.0,
        cfg.height as f64 / 2.0,
        cfg.width,
        cfg.height,
        0.1,
        100.0,
    )
}

/// Object id (1-based) owning plane point `(x, y)`.
fn object_at(x: f64, y: f64, split_x: f64, split_y: f64) -> u32 {
    if x < split_x {
        1
    } else if y < split_y {
        2
    } else {
        3
    }
}

/// Plane point seen through the center of pixel `(u, v)`.
fn plane_point(cam: &Camera, u: usize, v: usize) -> [f64; 3] {
    let c = cam.center();
    [
        c[0] + (u as f64 + 0.5 - cam.cx) * PLANE_DEPTH / cam.fx,
        c[1] + (v as f64 + 0.5 - cam.cy) * PLANE_DEPTH / cam.fy,
        PLANE_DEPTH,
    ]
}

pub fn generate(cfg: &SynthConfig) -> Result<SyntheticScene> {
    if cfg.embedding_dim < 5 {
        return Err(Error::invalid("synthetic scene needs embedding_dim >= 5"));
    }
    if cfg.width < 8 || cfg.height < 8 {
        return Err(Error::invalid("synthetic scene needs at least 8x8 pixels"));
    }
    if !(cfg.focal > 0.0 && cfg.noise >= 0.0 && cfg.footprint > 0.0) || !(0.0..=1.0).contains(&cfg.opacity) {
        return Err(Error::invalid("synthetic config out of range"));
    }
    let (w, h, d) = (cfg.width as usize, cfg.height as usize, cfg.embedding_dim);
    let pixel = PLANE_DEPTH / cfg.focal;

    // object boundaries on held-out pixel edges
    let heldout = camera_at(0.0, cfg)?;
    let split_x = ((w * 3 / 8) as f64 - heldout.cx) * pixel;
    let split_y = ((h * 9 / 16) as f64 - heldout.cy) * pixel;

    let mut rows = vec![vec![0f32; d]; OBJECTS];
    for (j, r) in rows.iter_mut().enumerate() {
        r[j] = 1.0;
    }
    let planted_bank = SemanticBank::new(OBJECTS, d, rows.concat(), cfg.seed, 0.0, 0)?;

    let third = 1.0 / 3.0;
    let radius = (2.0f64 / 3.0).sqrt();
    let canonicals = (0..3)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / 3.0;
            let mut c = vec![0f32; d];
            c[..3].iter_mut().for_each(|v| *v = third as f32);
            c[3] = (radius * angle.cos()) as f32;
            c[4] = (radius * angle.sin()) as f32;
            c
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shift = cfg.baseline_px as f64 * pixel;
    let input_cameras = vec![camera_at(-shift, cfg)?, camera_at(shift, cfg)?];

    let mut views = Vec::new();
    let mut planted_maps = Vec::new();
    let mut gaussians = Vec::with_capacity(2 * w * h);
    let s = (cfg.footprint * pixel) as f32;
    for (k, cam) in input_cameras.iter().enumerate() {
        let mut labels = Vec::with_capacity(w * h);
        for v in 0..h {
            for u in 0..w {
                let p = plane_point(cam, u, v);
                let id = object_at(p[0], p[1], split_x, split_y);
                labels.push(id);
                gaussians.push(GaussianPrimitive::with_rgb(
                    p.map(|c| c as f32),
                    [s, s, s * 0.25],
                    [1.0, 0.0, 0.0, 0.0],
                    cfg.opacity,
                    OBJECT_COLORS[id as usize - 1],
                ));
            }
        }
        let map = Raster::from_vec(w, h, 1, labels)?;
        let embeddings: Vec<Vec<f32>> = (0..OBJECTS)
            .map(|j| {
                let noisy: Vec<f64> = (0..d)
                    .map(|i| f64::from(u8::from(i == j)) + cfg.noise * standard_normal(&mut rng))
                    .collect();
                let norm = noisy.iter().map(|v| v * v).sum::<f64>().sqrt();
                noisy.iter().map(|v| (v / norm) as f32).collect()
            })
            .collect();
        let scores = vec![0.95; OBJECTS];
        views.push(ViewAnnotation::from_label_map(k as u32, &map, &embeddings, &scores)?);
        planted_maps.push(SemanticIndexMap {
            view_index: k as u32,
            values: map,
        });
    }
    let grid = PixelAlignedScene::new(gaussians, 2, h, w, vec![0, 1])?;

    let gt_masks = (1..=OBJECTS as u32)
        .map(|id| {
            let data = (0..h)
                .flat_map(|v| (0..w).map(move |u| (u, v)))
                .map(|(u, v)| {
                    let p = plane_point(&heldout, u, v);
                    object_at(p[0], p[1], split_x, split_y) == id
                })
                .collect();
            Raster::from_vec(w, h, 1, data)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SyntheticScene {
        config: cfg.clone(),
        planted_bank,
        canonicals,
        input_cameras,
        views,
        grid,
        planted_maps,
        heldout,
        gt_masks,
    })
}

/// Box-Muller; rand_distr is not worth a dependency for one draw site.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Paths written by [`write_scene`], relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthFiles {
    pub manifest: PathBuf,
    /// Grid with semantic indices 0, ready for `lift`.
    pub scene: PathBuf,
    /// Grid with the planted indices.
    pub labeled_scene: PathBuf,
    pub planted_bank: PathBuf,
    pub heldout_camera: PathBuf,
    pub queries: Vec<PathBuf>,
    pub canonicals: PathBuf,
    pub gt_masks: Vec<PathBuf>,
}

pub fn write_scene(scene: &SyntheticScene, dir: &Path) -> Result<SynthFiles> {
    let files = SynthFiles {
        manifest: "manifest.json".into(),
        scene: "scene.ply".into(),
        labeled_scene: "scene_planted.ply".into(),
        planted_bank: "bank_planted.bin".into(),
        heldout_camera: "heldout_camera.json".into(),
        queries: (1..=OBJECTS).map(|j| PathBuf::from(format!("query_{j}.emb"))).collect(),
        canonicals: "canonicals.emb".into(),
        gt_masks: (1..=OBJECTS).map(|j| PathBuf::from(format!("gt_{j}.png"))).collect(),
    };

    let mut manifest_views = Vec::new();
    for (k, (view, cam)) in scene.views.iter().zip(&scene.input_cameras).enumerate() {
        let label_map_path = PathBuf::from(format!("view_{k}_labels.png"));
        let embeddings_path = PathBuf::from(format!("view_{k}_embeddings.emb"));
        io::write_label_map_png(dir.join(&label_map_path), view.label_map())?;
        io::write_embeddings(dir.join(&embeddings_path), &EmbeddingMatrix::from_rows(view.embeddings())?)?;
        manifest_views.push(ManifestView {
            view_index: view.view_index,
            image_width: view.width() as u32,
            image_height: view.height() as u32,
            label_map_path,
            embeddings_path,
            camera: cam.clone(),
            mask_scores: view.masks().iter().map(|m| m.score).collect(),
            mask_paths: None,
        });
    }
    AnnotationManifest {
        version: MANIFEST_VERSION,
        embedding_dim: scene.config.embedding_dim,
        views: manifest_views,
    }
    .write(dir.join(&files.manifest))?;

    io::write_scene_ply(dir.join(&files.scene), &scene.grid.gaussians)?;
    io::write_scene_ply(dir.join(&files.labeled_scene), &scene.labeled_gaussians()?)?;
    io::write_bank(dir.join(&files.planted_bank), &scene.planted_bank)?;
    io::write_camera(dir.join(&files.heldout_camera), &scene.heldout)?;
    for (j, path) in files.queries.iter().enumerate() {
        io::write_embeddings(dir.join(path), &EmbeddingMatrix::from_rows(&[scene.query(j)])?)?;
    }
    io::write_embeddings(dir.join(&files.canonicals), &EmbeddingMatrix::from_rows(&scene.canonicals)?)?;
    for (mask, path) in scene.gt_masks.iter().zip(&files.gt_masks) {
        io::write_mask_png(dir.join(path), mask)?;
    }
    Ok(files)
}
