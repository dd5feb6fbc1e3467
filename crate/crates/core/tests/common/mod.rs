#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semsplat::{Camera, GaussianPrimitive};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| normal(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

pub fn unit_f32(rng: &mut ChaCha8Rng, d: usize) -> Vec<f32> {
    unit_vector(rng, d).into_iter().map(|x| x as f32).collect()
}

pub fn quaternion(rng: &mut ChaCha8Rng) -> [f32; 4] {
    let q = unit_vector(rng, 4);
    [q[0] as f32, q[1] as f32, q[2] as f32, q[3] as f32]
}

/// Random Gaussian inside the box `[-1, 1]³`, SH degree 0..=3, semantic
/// index in `1..=m` (0 when `m == 0`).
pub fn gaussian(rng: &mut ChaCha8Rng, m: u32) -> GaussianPrimitive {
    let degree = rng.random_range(0..=3usize);
    let sh = (0..(degree + 1) * (degree + 1))
        .map(|k| {
            let amp = if k == 0 { 1.5 } else { 0.3 };
            [0; 3].map(|_: i32| rng.random_range(-amp..amp))
        })
        .collect();
    let log_scale = |rng: &mut ChaCha8Rng| rng.random_range((0.02f32).ln()..(0.15f32).ln()).exp();
    GaussianPrimitive {
        position: [0; 3].map(|_: i32| rng.random_range(-1.0f32..1.0)),
        opacity: rng.random_range(0.05f32..1.0),
        scale: [log_scale(rng), log_scale(rng), log_scale(rng)],
        rotation: quaternion(rng),
        sh,
        semantic_index: if m == 0 { 0 } else { rng.random_range(1..=m) },
    }
}

pub fn scene(rng: &mut ChaCha8Rng, n: usize, m: u32) -> Vec<GaussianPrimitive> {
    (0..n).map(|_| gaussian(rng, m)).collect()
}

/// Camera on a sphere of radius 4 looking at the origin.
pub fn orbit_camera(rng: &mut ChaCha8Rng, width: u32, height: u32, focal: f64) -> Camera {
    loop {
        let d = unit_vector(rng, 3);
        let eye = [4.0 * d[0], 4.0 * d[1], 4.0 * d[2]];
        let up = if d[1].abs() > 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        if let Ok(cam) = Camera::look_at(eye, [0.0; 3], up, focal, width, height, 0.1, 100.0) {
            return cam;
        }
    }
}

pub fn max_abs_diff(a: &[f32], b: &[f32]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (*x as f64 - *y as f64).abs()).fold(0.0, f64::max)
}

/// Adjusted Rand index of two labelings.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for (&i, &j) in a.iter().zip(b) {
        table[i][j] += 1;
    }
    let c2 = |x: u64| (x * x.saturating_sub(1)) as f64 / 2.0;
    let index: f64 = table.iter().flatten().map(|&x| c2(x)).sum();
    let rows: f64 = table.iter().map(|r| c2(r.iter().sum())).sum();
    let cols: f64 = (0..kb).map(|j| c2(table.iter().map(|r| r[j]).sum())).sum();
    let total = c2(n as u64);
    let expected = rows * cols / total;
    let max = (rows + cols) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}
