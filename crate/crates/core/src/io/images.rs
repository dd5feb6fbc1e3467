//! 8-bit PNG outputs (color renders, masks, relevancy heatmaps) and the
//! matching readers used for evaluation inputs.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use crate::error::{Error, Result};
use crate::model::Raster;

/// Heatmap stops, evenly spaced over `[0, 1]` and linearly interpolated:
/// black, indigo, magenta, orange, pale yellow.
const HEATMAP: [[f64; 3]; 5] = [
    [0.0, 0.0, 0.0],
    [32.0, 0.0, 160.0],
    [200.0, 0.0, 140.0],
    [255.0, 140.0, 0.0],
    [255.0, 255.0, 200.0],
];

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn heatmap_color(value: f64) -> [u8; 3] {
    let t = if value.is_finite() { value.clamp(0.0, 1.0) } else { 0.0 } * (HEATMAP.len() - 1) as f64;
    let i = (t.floor() as usize).min(HEATMAP.len() - 2);
    let f = t - i as f64;
    [0, 1, 2].map(|c| (HEATMAP[i][c] * (1.0 - f) + HEATMAP[i + 1][c] * f).round() as u8)
}

fn encode_png(img: DynamicImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn write_rgb_png(path: impl AsRef<Path>, color: &Raster<f32>) -> Result<()> {
    if color.channels() != 3 {
        return Err(Error::invalid("rgb output needs 3 channels"));
    }
    let raw = color.data().iter().map(|&v| to_u8(v as f64)).collect();
    let img = RgbImage::from_raw(color.width() as u32, color.height() as u32, raw).expect("sized buffer");
    super::write_bytes(path.as_ref(), &encode_png(DynamicImage::ImageRgb8(img))?)
}

/// 0 / 255 grayscale PNG.
pub fn write_mask_png(path: impl AsRef<Path>, mask: &Raster<bool>) -> Result<()> {
    let raw = mask.data().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let img = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, raw).expect("sized buffer");
    super::write_bytes(path.as_ref(), &encode_png(DynamicImage::ImageLuma8(img))?)
}

pub fn write_heatmap_png(path: impl AsRef<Path>, relevancy: &Raster<f64>) -> Result<()> {
    let raw = relevancy.data().iter().flat_map(|&r| heatmap_color(r)).collect();
    let img = RgbImage::from_raw(relevancy.width() as u32, relevancy.height() as u32, raw).expect("sized buffer");
    super::write_bytes(path.as_ref(), &encode_png(DynamicImage::ImageRgb8(img))?)
}

/// Any PNG or PGM image; a pixel is inside the mask when its luma is nonzero.
pub fn read_mask(path: impl AsRef<Path>) -> Result<Raster<bool>> {
    let path = path.as_ref();
    let bytes = super::read_bytes(path)?;
    let img = image::load_from_memory(&bytes).or_else(|_| {
        // PGM with maxval 65535 goes through the label-map reader
        super::decode_label_map(&bytes).map(|m| {
            let raw: Vec<u16> = m.data().iter().map(|&v| v as u16).collect();
            DynamicImage::ImageLuma16(image::ImageBuffer::from_raw(m.width() as u32, m.height() as u32, raw).unwrap())
        })
    })?;
    let luma = img.to_luma16();
    let (w, h) = luma.dimensions();
    Raster::from_vec(w as usize, h as usize, 1, luma.into_raw().into_iter().map(|v| v != 0).collect())
}

/// RGB image scaled to `[0, 1]`.
pub fn read_rgb_png(path: impl AsRef<Path>) -> Result<Raster<f32>> {
    let path = path.as_ref();
    let img = image::load_from_memory(&super::read_bytes(path)?)?;
    let rgb = img.to_rgb32f();
    let (w, h) = rgb.dimensions();
    Raster::from_vec(w as usize, h as usize, 3, rgb.into_raw())
}
