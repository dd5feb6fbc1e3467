//! Dense feature recovery from blended semantic weights and
//! open-vocabulary relevancy queries against the recovered map.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bank::SemanticBank;
use crate::error::{Error, Result};
use crate::model::Raster;

/// Pixels whose blended feature is shorter than this are background.
pub const BACKGROUND_EPS: f64 = 1e-8;
pub const DEFAULT_TEMPERATURE: f64 = 10.0;
pub const DEFAULT_FLOOR: f64 = 0.5;
pub const DEFAULT_MASK_THRESHOLD: f64 = 0.5;

/// Unit-length `H × W × D` features; background pixels are all-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub values: Raster<f32>,
    pub background: Raster<bool>,
}

impl FeatureMap {
    pub fn dim(&self) -> usize {
        self.values.channels()
    }

    /// Rebuilds the background flags from a raw feature raster (zero vectors
    /// are background).
    pub fn from_values(values: Raster<f32>) -> Self {
        let bg: Vec<bool> = values.pixels().map(|p| p.iter().all(|&v| v == 0.0)).collect();
        let background = Raster::from_vec(values.width(), values.height(), 1, bg).expect("one flag per pixel");
        Self { values, background }
    }
}

/// `Σ_m E_m · b_m` for one pixel, before normalization.
pub fn blend_feature(weights: &[f32], bank: &SemanticBank) -> Vec<f64> {
    let mut out = vec![0.0f64; bank.dim()];
    for (m, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (o, &b) in out.iter_mut().zip(bank.row(m)) {
            *o += w as f64 * b as f64;
        }
    }
    out
}

/// `F(v) = E(v)ᵀ B`, normalized per pixel.
pub fn recover_features(semantic: &Raster<f32>, bank: &SemanticBank) -> Result<FeatureMap> {
    if semantic.channels() != bank.len() {
        return Err(Error::invalid(format!(
            "semantic buffer has {} channels, bank has {} entries",
            semantic.channels(),
            bank.len()
        )));
    }
    let dim = bank.dim();
    let pixels: Vec<(Vec<f32>, bool)> = semantic
        .data()
        .par_chunks(semantic.channels().max(1))
        .map(|e| {
            let f = if bank.is_empty() { vec![0.0; dim] } else { blend_feature(e, bank) };
            let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < BACKGROUND_EPS {
                (vec![0.0f32; dim], true)
            } else {
                (f.iter().map(|v| (v / norm) as f32).collect(), false)
            }
        })
        .collect();
    let (w, h) = (semantic.width(), semantic.height());
    let (values, background): (Vec<Vec<f32>>, Vec<bool>) = pixels.into_iter().unzip();
    Ok(FeatureMap {
        values: Raster::from_vec(w, h, dim, values.concat())?,
        background: Raster::from_vec(w, h, 1, background)?,
    })
}

/// Query embedding, canonical phrase embeddings and thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryConfig {
    pub query: Vec<f32>,
    pub canonicals: Vec<Vec<f32>>,
    pub temperature: f64,
    /// Scores below this are zeroed.
    pub floor: f64,
    pub mask_threshold: f64,
}

impl QueryConfig {
    pub fn new(query: Vec<f32>, canonicals: Vec<Vec<f32>>) -> Self {
        Self {
            query,
            canonicals,
            temperature: DEFAULT_TEMPERATURE,
            floor: DEFAULT_FLOOR,
            mask_threshold: DEFAULT_MASK_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.canonicals.is_empty() {
            return Err(Error::invalid("at least one canonical embedding is required"));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid(format!("temperature must be positive, got {}", self.temperature)));
        }
        for (name, t) in [("floor", self.floor), ("mask_threshold", self.mask_threshold)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::invalid(format!("{name} {t} outside [0, 1]")));
            }
        }
        let d = self.query.len();
        for (i, e) in std::iter::once(&self.query).chain(&self.canonicals).enumerate() {
            if e.len() != d {
                return Err(Error::invalid("query and canonical embeddings differ in dimension"));
            }
            let norm = e.iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-5 {
                return Err(Error::invalid(format!("embedding {i} has norm {norm}, expected unit")));
            }
        }
        Ok(())
    }
}

#[inline]
fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Raw relevancy of one unit feature: the minimum over canonicals of the
/// pairwise softmax `exp(τ s_q) / (exp(τ s_q) + exp(τ s_c))`, evaluated as
/// `sigmoid(τ (s_q - s_c))`. No floor applied.
pub fn relevancy_score(feature: &[f32], query: &[f32], canonicals: &[Vec<f32>], temperature: f64) -> f64 {
    let s_q = dot(feature, query);
    canonicals
        .iter()
        .map(|c| sigmoid(temperature * (s_q - dot(feature, c))))
        .fold(f64::INFINITY, f64::min)
}

/// Per-pixel relevancy with the floor applied; background pixels score 0.
pub fn relevancy_map(features: &FeatureMap, cfg: &QueryConfig) -> Result<Raster<f64>> {
    cfg.validate()?;
    if features.dim() != cfg.query.len() {
        return Err(Error::invalid(format!(
            "feature dimension {} does not match embedding dimension {}",
            features.dim(),
            cfg.query.len()
        )));
    }
    let scores: Vec<f64> = features
        .values
        .data()
        .par_chunks(features.dim().max(1))
        .zip(features.background.data().par_iter())
        .map(|(f, &bg)| {
            if bg {
                return 0.0;
            }
            let r = relevancy_score(f, &cfg.query, &cfg.canonicals, cfg.temperature);
            if r < cfg.floor {
                0.0
            } else {
                r
            }
        })
        .collect();
    Raster::from_vec(features.values.width(), features.values.height(), 1, scores)
}

/// `relevancy >= threshold`.
pub fn segment(relevancy: &Raster<f64>, threshold: f64) -> Result<Raster<bool>> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid(format!("mask threshold {threshold} outside [0, 1]")));
    }
    Ok(relevancy.map(|r| r >= threshold))
}
