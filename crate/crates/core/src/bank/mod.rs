//! Semantic memory bank: clustering of pooled mask embeddings and the
//! per-view semantic index maps derived from it.

mod kmeans;

pub use kmeans::{kmeans, KMeansResult, DEFAULT_MAX_ITERS};

use std::collections::HashMap;

use crate::annotation::ViewAnnotation;
use crate::error::{Error, Result};
use crate::model::Raster;

/// Over-provisioning factor for the cluster count.
pub const DEFAULT_LAMBDA: f64 = 1.2;

/// `M × D` unit-row matrix of cluster centroids. Semantic index `k ≥ 1`
/// refers to row `k - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticBank {
    centroids: Vec<f32>,
    m: usize,
    dim: usize,
    pub seed: u64,
    pub lambda: f64,
    pub iterations: u32,
}

impl SemanticBank {
    /// Row-major centroids. Rows must be unit length.
    pub fn new(m: usize, dim: usize, centroids: Vec<f32>, seed: u64, lambda: f64, iterations: u32) -> Result<Self> {
        if centroids.len() != m * dim {
            return Err(Error::invalid(format!(
                "bank {m}x{dim} needs {} values, got {}",
                m * dim,
                centroids.len()
            )));
        }
        if m > 0 && dim == 0 {
            return Err(Error::invalid("bank rows need a nonzero dimension"));
        }
        let bank = Self {
            centroids,
            m,
            dim,
            seed,
            lambda,
            iterations,
        };
        for i in 0..m {
            let norm = bank.row(i).iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt();
            if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
                return Err(Error::invalid(format!("bank row {i} has norm {norm}")));
            }
        }
        Ok(bank)
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("bank rows differ in dimension"));
        }
        Self::new(rows.len(), dim, rows.concat(), 0, 0.0, 0)
    }

    pub fn empty(dim: usize, seed: u64, lambda: f64) -> Self {
        Self {
            centroids: Vec::new(),
            m: 0,
            dim,
            seed,
            lambda,
            iterations: 0,
        }
    }

    /// Number of entries `M`.
    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.centroids[i * self.dim..(i + 1) * self.dim]
    }

    pub fn centroids(&self) -> &[f32] {
        &self.centroids
    }
}

/// Per-view map of bank indices, 0 = background.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticIndexMap {
    pub view_index: u32,
    pub values: Raster<u32>,
}

/// `clamp(round(lambda · n_total / k_views), 1, n_total)`, or 0 for no masks.
pub fn compute_cluster_count(n_total: usize, k_views: usize, lambda: f64) -> Result<usize> {
    if k_views == 0 {
        return Err(Error::invalid("cluster count needs at least one view"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    if n_total == 0 {
        return Ok(0);
    }
    let raw = (lambda * n_total as f64 / k_views as f64 + 0.5).floor();
    Ok((raw as usize).clamp(1, n_total))
}

fn normalized(e: &[f32]) -> Result<Vec<f32>> {
    let norm = e.iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::invalid("embedding has zero or non-finite norm"));
    }
    Ok(e.iter().map(|&v| (v as f64 / norm) as f32).collect())
}

/// Builds the bank with [`DEFAULT_MAX_ITERS`] K-Means iterations.
pub fn build_bank(views: &[ViewAnnotation], lambda: f64, seed: u64) -> Result<(SemanticBank, Vec<SemanticIndexMap>)> {
    build_bank_with(views, lambda, seed, DEFAULT_MAX_ITERS)
}

/// Pools every view's mask embeddings, clusters them into
/// [`compute_cluster_count`] entries and rewrites each label map from mask
/// ids to bank indices. Views are expected to be NMS-filtered already.
///
/// Bank indices are numbered 1..M in order of first appearance over the
/// pooled masks (view order, then mask order).
pub fn build_bank_with(
    views: &[ViewAnnotation],
    lambda: f64,
    seed: u64,
    max_iters: usize,
) -> Result<(SemanticBank, Vec<SemanticIndexMap>)> {
    if views.is_empty() {
        return Err(Error::invalid("bank construction needs at least one view"));
    }
    let dims: Vec<usize> = views.iter().filter_map(ViewAnnotation::embedding_dim).collect();
    let dim = dims.first().copied().unwrap_or(0);
    if dims.iter().any(|&d| d != dim) {
        return Err(Error::invalid("embedding dimension differs between views"));
    }

    let mut pooled = Vec::new();
    let mut owners = Vec::new();
    for (v, view) in views.iter().enumerate() {
        for (mask, emb) in view.masks().iter().zip(view.embeddings()) {
            pooled.push(normalized(emb)?);
            owners.push((v, mask.mask_id));
        }
    }

    let m = compute_cluster_count(pooled.len(), views.len(), lambda)?;
    if m == 0 {
        let maps = views
            .iter()
            .map(|v| SemanticIndexMap {
                view_index: v.view_index,
                values: Raster::filled(v.width(), v.height(), 1, 0),
            })
            .collect();
        return Ok((SemanticBank::empty(dim, seed, lambda), maps));
    }

    let result = kmeans(&pooled, m, seed, max_iters)?;

    // dense renumbering by first appearance; clusters never used go last
    let mut renumber = vec![0u32; m];
    let mut next = 1u32;
    for &a in &result.assignments {
        if renumber[a] == 0 {
            renumber[a] = next;
            next += 1;
        }
    }
    for r in renumber.iter_mut().filter(|r| **r == 0) {
        *r = next;
        next += 1;
    }
    let mut rows = vec![Vec::new(); m];
    for (c, centroid) in result.centroids.into_iter().enumerate() {
        rows[renumber[c] as usize - 1] = centroid;
    }
    let bank = SemanticBank::new(m, dim, rows.concat(), seed, lambda, result.iterations as u32)?;

    let mut lookup: Vec<HashMap<u32, u32>> = vec![HashMap::new(); views.len()];
    for (&(v, id), &a) in owners.iter().zip(&result.assignments) {
        lookup[v].insert(id, renumber[a]);
    }
    let maps = views
        .iter()
        .zip(&lookup)
        .map(|(view, table)| SemanticIndexMap {
            view_index: view.view_index,
            values: view.label_map().map(|id| if id == 0 { 0 } else { table[&id] }),
        })
        .collect();
    Ok((bank, maps))
}
