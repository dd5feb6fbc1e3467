//! Lloyd's K-Means with seeded k-means++ initialization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    /// Cluster means at convergence, before normalization.
    pub means: Vec<Vec<f64>>,
    /// Unit-length centroids.
    pub centroids: Vec<Vec<f32>>,
    pub assignments: Vec<usize>,
    /// Objective after the initial assignment and after every iteration.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeansResult {
    pub fn objective(&self) -> f64 {
        *self.objective_history.last().unwrap_or(&0.0)
    }
}

#[inline]
fn sq_dist(a: &[f32], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &c)| (x as f64 - c).powi(2)).sum()
}

/// Clusters `features` (rows of equal length, expected unit-normalized) into
/// `m` groups. Ties in assignment go to the lowest centroid index; an empty
/// cluster is re-seeded with the point farthest from its current centroid.
/// Results depend only on the inputs and `seed`.
pub fn kmeans(features: &[Vec<f32>], m: usize, seed: u64, max_iters: usize) -> Result<KMeansResult> {
    let n = features.len();
    if m < 1 || m > n {
        return Err(Error::invalid(format!("cluster count {m} must be in [1, {n}]")));
    }
    let dim = features[0].len();
    if dim == 0 || features.iter().any(|f| f.len() != dim) {
        return Err(Error::invalid("feature rows must share a nonzero dimension"));
    }
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite feature value"));
    }

    let mut means = init_plus_plus(features, m, seed);
    let (mut assignments, objective) = assign(features, &means);
    let mut history = vec![objective];
    let mut iterations = 0;
    for _ in 0..max_iters {
        means = update(features, &assignments, &means);
        let (next, objective) = assign(features, &means);
        iterations += 1;
        history.push(objective);
        let changed = next != assignments;
        assignments = next;
        if !changed {
            break;
        }
    }

    let centroids = means
        .iter()
        .enumerate()
        .map(|(c, mean)| {
            let norm = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                mean.iter().map(|v| (v / norm) as f32).collect()
            } else {
                // members cancel out; fall back to the first member's direction
                let first = assignments.iter().position(|&a| a == c).unwrap_or(0);
                let f = &features[first];
                let fnorm = f.iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                f.iter().map(|&v| (v as f64 / fnorm) as f32).collect()
            }
        })
        .collect();

    Ok(KMeansResult {
        means,
        centroids,
        assignments,
        objective_history: history,
        iterations,
    })
}

/// D²-weighted draw of one index; `None` when every weight is zero.
fn sample_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &d) in weights.iter().enumerate() {
        acc += d;
        if d > 0.0 && acc > target {
            return Some(i);
        }
    }
    // rounding can leave `target` just past the final sum
    weights.iter().rposition(|&d| d > 0.0)
}

/// Greedy k-means++: each step draws `2 + ⌊ln m⌋` D²-weighted candidates
/// and keeps the one that lowers the summed squared distance the most.
fn init_plus_plus(features: &[Vec<f32>], m: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = features.len();
    let trials = 2 + (m as f64).ln().floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let to_f64 = |i: usize| features[i].iter().map(|&v| v as f64).collect::<Vec<f64>>();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut centers = vec![to_f64(chosen[0])];
    let mut nearest: Vec<f64> = features.iter().map(|f| sq_dist(f, &centers[0])).collect();
    while centers.len() < m {
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for _ in 0..trials {
            let Some(cand) = sample_weighted(&mut rng, &nearest) else { break };
            let c = to_f64(cand);
            let updated: Vec<f64> = nearest.iter().zip(features).map(|(&d, f)| d.min(sq_dist(f, &c))).collect();
            let potential: f64 = updated.iter().sum();
            if best.as_ref().is_none_or(|b| potential < b.1) {
                best = Some((cand, potential, updated));
            }
        }
        let (pick, updated) = match best {
            Some((pick, _, updated)) => (pick, updated),
            // every point coincides with a center; take unused indices in order
            None => ((0..n).find(|i| !chosen.contains(i)).unwrap(), nearest.clone()),
        };
        chosen.push(pick);
        centers.push(to_f64(pick));
        nearest = updated;
    }
    centers
}

fn assign(features: &[Vec<f32>], means: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let pairs: Vec<(usize, f64)> = features
        .par_iter()
        .map(|f| {
            let mut best = (0, f64::INFINITY);
            for (c, mean) in means.iter().enumerate() {
                let d = sq_dist(f, mean);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .collect();
    // sequential sum keeps the objective independent of the worker count
    let objective = pairs.iter().map(|p| p.1).sum();
    (pairs.into_iter().map(|p| p.0).collect(), objective)
}

fn update(features: &[Vec<f32>], assignments: &[usize], previous: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = previous.len();
    let dim = features[0].len();
    let mut sums = vec![vec![0.0f64; dim]; m];
    let mut counts = vec![0usize; m];
    for (f, &a) in features.iter().zip(assignments) {
        counts[a] += 1;
        for (s, &v) in sums[a].iter_mut().zip(f) {
            *s += v as f64;
        }
    }
    let mut means: Vec<Vec<f64>> = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s.into_iter().map(|v| v / c as f64).collect() } else { Vec::new() })
        .collect();

    let empty: Vec<usize> = (0..m).filter(|&c| counts[c] == 0).collect();
    if !empty.is_empty() {
        let mut spread: Vec<f64> = features
            .iter()
            .zip(assignments)
            .map(|(f, &a)| if counts[a] > 0 { sq_dist(f, &means[a]) } else { 0.0 })
            .collect();
        for c in empty {
            let mut far = 0;
            for (i, &d) in spread.iter().enumerate() {
                if d > spread[far] {
                    far = i;
                }
            }
            spread[far] = 0.0;
            means[c] = features[far].iter().map(|&v| v as f64).collect();
        }
    }
    means
}
