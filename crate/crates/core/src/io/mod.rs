//! File formats.
//!
//! | file              | layout                                                         |
//! |-------------------|----------------------------------------------------------------|
//! | scene `.ply`      | binary little-endian 3DGS vertex layout + `semantic_index`     |
//! | `SEGEMB1` blob    | magic, `u32 N`, `u32 D`, `N·D` f32, all little-endian          |
//! | label map         | 16-bit grayscale PNG or binary PGM (`P5`, maxval 65535)        |
//! | `SEGBNK1` bank    | magic, `u32 M`, `u32 D`, `u64 seed`, `f64 λ`, `u32 iters`, `u32 0`, `M·D` f32 |
//! | `SEGIMG1` buffer  | magic, `u32 H`, `u32 W`, `u32 C`, `H·W·C` f32 pixel-interleaved |
//! | manifest / camera | JSON, UTF-8                                                    |
//!
//! Readers either return a complete value or an error; nothing partially
//! decoded escapes.

mod bank;
mod binary;
mod buffer;
mod embeddings;
mod images;
mod label_map;
mod manifest;
mod ply;

pub use bank::{decode_bank, encode_bank, read_bank, write_bank};
pub use buffer::{decode_buffer, encode_buffer, read_buffer, write_buffer};
pub use embeddings::{decode_embeddings, encode_embeddings, read_embeddings, write_embeddings, EmbeddingMatrix};
pub use images::{heatmap_color, read_mask, read_rgb_png, write_heatmap_png, write_mask_png, write_rgb_png};
pub use label_map::{
    decode_label_map, encode_label_map_pgm, encode_label_map_png, read_label_map, write_label_map_pgm,
    write_label_map_png,
};
pub use manifest::{read_camera, write_camera, AnnotationManifest, ManifestView, MANIFEST_VERSION};
pub use ply::{decode_scene_ply, encode_scene_ply, read_scene_ply, write_scene_ply};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
