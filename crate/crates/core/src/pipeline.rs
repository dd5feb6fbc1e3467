//! Run configuration and the glue between stages.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::annotation::{ViewAnnotation, DEFAULT_NMS_IOU};
use crate::bank::{build_bank, SemanticBank, SemanticIndexMap, DEFAULT_LAMBDA};
use crate::error::{Error, Result};
use crate::query::{QueryConfig, DEFAULT_FLOOR, DEFAULT_MASK_THRESHOLD, DEFAULT_TEMPERATURE};
use crate::render::RenderSettings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub lambda: f64,
    pub seed: u64,
    pub temperature: f64,
    pub nms_iou: f64,
    pub relevancy_floor: f64,
    pub mask_threshold: f64,
    pub render: RenderSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            seed: 0,
            temperature: DEFAULT_TEMPERATURE,
            nms_iou: DEFAULT_NMS_IOU,
            relevancy_floor: DEFAULT_FLOOR,
            mask_threshold: DEFAULT_MASK_THRESHOLD,
            render: RenderSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid(format!("temperature must be positive, got {}", self.temperature)));
        }
        for (name, v) in [
            ("nms_iou", self.nms_iou),
            ("relevancy_floor", self.relevancy_floor),
            ("mask_threshold", self.mask_threshold),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} {v} outside [0, 1]")));
            }
        }
        if self.nms_iou == 0.0 {
            return Err(Error::invalid("nms_iou must be greater than 0"));
        }
        self.render.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn digest(&self) -> String {
        sha256_hex(self.to_json().as_bytes())
    }

    pub fn query_config(&self, query: Vec<f32>, canonicals: Vec<Vec<f32>>) -> QueryConfig {
        QueryConfig {
            query,
            canonicals,
            temperature: self.temperature,
            floor: self.relevancy_floor,
            mask_threshold: self.mask_threshold,
        }
    }

    /// NMS on every view, then the shared bank.
    pub fn build_bank(&self, views: Vec<ViewAnnotation>) -> Result<(SemanticBank, Vec<SemanticIndexMap>)> {
        let views = views
            .into_iter()
            .map(|v| v.suppress_overlaps(self.nms_iou))
            .collect::<Result<Vec<_>>>()?;
        build_bank(&views, self.lambda, self.seed)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&crate::io::read_bytes(path)?))
}
