//! JSON interchange with the offline extractor.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::annotation::{MaskAnnotation, ViewAnnotation};
use crate::error::{Error, Result};
use crate::model::Camera;

pub const MANIFEST_VERSION: u32 = 1;

/// One annotated input view. Paths are relative to the manifest file.
///
/// Label-map pixel values are mask ids; mask id `j` owns embedding row
/// `j - 1` and `mask_scores[j - 1]`. When `mask_paths` is present, mask `j`
/// is instead read from `mask_paths[j - 1]` (nonzero pixels are inside), so
/// overlapping masks can be passed through NMS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestView {
    pub view_index: u32,
    pub image_width: u32,
    pub image_height: u32,
    pub label_map_path: PathBuf,
    pub embeddings_path: PathBuf,
    pub camera: Camera,
    #[serde(default)]
    pub mask_scores: Vec<f32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_paths: Option<Vec<PathBuf>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationManifest {
    pub version: u32,
    pub embedding_dim: usize,
    pub views: Vec<ManifestView>,
}

impl AnnotationManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Self = serde_json::from_str(&text).map_err(|e| Error::parse("manifest", e.to_string()))?;
        if manifest.version != MANIFEST_VERSION {
            return Err(Error::parse(
                "manifest version",
                format!("unsupported version {}, expected {MANIFEST_VERSION}", manifest.version),
            ));
        }
        for v in &manifest.views {
            v.camera
                .validate()
                .map_err(|e| Error::parse(format!("manifest view {} camera", v.view_index), e.to_string()))?;
            if v.camera.width != v.image_width || v.camera.height != v.image_height {
                return Err(Error::parse(
                    format!("manifest view {} camera", v.view_index),
                    "camera resolution differs from image size",
                ));
            }
        }
        Ok(manifest)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        super::write_bytes(path.as_ref(), text.as_bytes())
    }

    pub fn cameras(&self) -> Vec<Camera> {
        self.views.iter().map(|v| v.camera.clone()).collect()
    }

    /// Loads every referenced file and builds the per-view annotations.
    /// `base` is the directory relative paths are resolved against.
    pub fn load_views(&self, base: &Path) -> Result<Vec<ViewAnnotation>> {
        self.views.iter().map(|v| self.load_view(v, base)).collect()
    }

    fn load_view(&self, v: &ManifestView, base: &Path) -> Result<ViewAnnotation> {
        let ctx = |what: &str| format!("manifest view {} {what}", v.view_index);
        let emb = super::read_embeddings(base.join(&v.embeddings_path))?;
        if emb.rows > 0 && emb.cols != self.embedding_dim {
            return Err(Error::parse(
                ctx("embeddings"),
                format!("dimension {} differs from embedding_dim {}", emb.cols, self.embedding_dim),
            ));
        }
        let rows = emb.to_rows();
        let (w, h) = (v.image_width as usize, v.image_height as usize);
        match &v.mask_paths {
            None => {
                let map = super::read_label_map(base.join(&v.label_map_path))?;
                if map.width() != w || map.height() != h {
                    return Err(Error::parse(
                        ctx("label map"),
                        format!("{}x{} differs from image size {w}x{h}", map.width(), map.height()),
                    ));
                }
                ViewAnnotation::from_label_map(v.view_index, &map, &rows, &v.mask_scores)
                    .map_err(|e| Error::parse(ctx("label map"), e.to_string()))
            }
            Some(paths) => {
                if paths.len() != rows.len() {
                    return Err(Error::parse(
                        ctx("mask_paths"),
                        format!("{} masks but {} embedding rows", paths.len(), rows.len()),
                    ));
                }
                let mut masks = Vec::with_capacity(paths.len());
                for (j, p) in paths.iter().enumerate() {
                    let bitmap = super::read_mask(base.join(p))?;
                    if bitmap.width() != w || bitmap.height() != h {
                        return Err(Error::parse(ctx("mask"), format!("{} has the wrong size", p.display())));
                    }
                    let score = v.mask_scores.get(j).copied().unwrap_or(0.0);
                    masks.push(
                        MaskAnnotation::new(j as u32 + 1, w, h, bitmap.into_vec(), score)
                            .map_err(|e| Error::parse(ctx("mask"), e.to_string()))?,
                    );
                }
                ViewAnnotation::new(v.view_index, w, h, masks, rows).map_err(|e| Error::parse(ctx("masks"), e.to_string()))
            }
        }
    }
}

pub fn read_camera(path: impl AsRef<Path>) -> Result<Camera> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cam: Camera = serde_json::from_str(&text).map_err(|e| Error::parse("camera", e.to_string()))?;
    cam.validate().map_err(|e| Error::parse("camera", e.to_string()))?;
    Ok(cam)
}

pub fn write_camera(path: impl AsRef<Path>, cam: &Camera) -> Result<()> {
    super::write_bytes(path.as_ref(), serde_json::to_string_pretty(cam)?.as_bytes())
}
