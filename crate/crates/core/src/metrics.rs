//! Segmentation and image-quality metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Raster;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// `|pred ∧ gt| / |pred ∨ gt|`, and 1 when both masks are empty.
pub fn iou(pred: &Raster<bool>, gt: &Raster<bool>) -> Result<f64> {
    if !pred.same_shape(gt) {
        return Err(Error::invalid(format!(
            "mask shapes differ: {}x{} vs {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        inter += (p && g) as usize;
        union += (p || g) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// PSNR in dB for images in `[0, 1]`; `f64::INFINITY` for identical images.
pub fn psnr(img: &Raster<f32>, reference: &Raster<f32>) -> Result<f64> {
    if !img.same_shape(reference) || img.data().is_empty() {
        return Err(Error::invalid("psnr needs two non-empty images of the same shape"));
    }
    let mse = img
        .data()
        .iter()
        .zip(reference.data())
        .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
        .sum::<f64>()
        / img.data().len() as f64;
    Ok(if mse == 0.0 { f64::INFINITY } else { 10.0 * (1.0 / mse).log10() })
}

fn gray(img: &Raster<f32>) -> Result<Vec<f64>> {
    match img.channels() {
        1 => Ok(img.data().iter().map(|&v| v as f64).collect()),
        3 => Ok(img
            .pixels()
            .map(|p| LUMA[0] * p[0] as f64 + LUMA[1] * p[1] as f64 + LUMA[2] * p[2] as f64)
            .collect()),
        c => Err(Error::invalid(format!("ssim expects 1 or 3 channels, got {c}"))),
    }
}

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let g: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| (-((i as f64 - half).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let sum: f64 = g.iter().sum();
    let g: Vec<f64> = g.iter().map(|v| v / sum).collect();
    let mut w = Vec::with_capacity(SSIM_WINDOW * SSIM_WINDOW);
    for a in &g {
        for b in &g {
            w.push(a * b);
        }
    }
    w
}

/// Mean SSIM over every fully-contained 11×11 Gaussian window (σ = 1.5) of
/// the luma channel, dynamic range 1.
pub fn ssim(img: &Raster<f32>, reference: &Raster<f32>) -> Result<f64> {
    if !img.same_shape(reference) {
        return Err(Error::invalid("ssim needs images of the same shape"));
    }
    let (w, h) = (img.width(), img.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::invalid(format!(
            "ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {w}x{h}"
        )));
    }
    let (x, y) = (gray(img)?, gray(reference)?);
    let window = gaussian_window();
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let mut total = 0.0;
    let mut count = 0usize;
    for oy in 0..=h - SSIM_WINDOW {
        for ox in 0..=w - SSIM_WINDOW {
            let (mut mx, mut my, mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for wy in 0..SSIM_WINDOW {
                for wx in 0..SSIM_WINDOW {
                    let k = window[wy * SSIM_WINDOW + wx];
                    let i = (oy + wy) * w + ox + wx;
                    mx += k * x[i];
                    my += k * y[i];
                    xx += k * x[i] * x[i];
                    yy += k * y[i] * y[i];
                    xy += k * x[i] * y[i];
                }
            }
            let vx = xx - mx * mx;
            let vy = yy - my * my;
            let cov = xy - mx * my;
            total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Metrics of one evaluation run. An infinite PSNR is written as `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_query_iou: BTreeMap<String, f64>,
    pub miou: f64,
    #[serde(with = "maybe_infinite")]
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
    pub config_digest: String,
}

impl EvalReport {
    pub fn new(per_query_iou: BTreeMap<String, f64>, psnr_db: Option<f64>, ssim: Option<f64>, config_digest: String) -> Self {
        let miou = if per_query_iou.is_empty() {
            0.0
        } else {
            per_query_iou.values().sum::<f64>() / per_query_iou.len() as f64
        };
        Self {
            per_query_iou,
            miou,
            psnr_db,
            ssim,
            config_digest,
        }
    }
}

mod maybe_infinite {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_infinite() && *x > 0.0 => Repr::Text("inf".into()).serialize(s),
            Some(x) => Repr::Num(*x).serialize(s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Num(x)) => Ok(Some(x)),
            Some(Repr::Text(t)) if t == "inf" => Ok(Some(f64::INFINITY)),
            Some(Repr::Text(t)) => Err(serde::de::Error::custom(format!("unexpected psnr value {t:?}"))),
        }
    }
}
