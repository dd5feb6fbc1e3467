//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any required criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use semsplat::bank::kmeans;
use semsplat::io;
use semsplat::query::{relevancy_score, sigmoid, FeatureMap};
use semsplat::synth::{generate, SynthConfig};
use semsplat::{
    compute_cluster_count, metrics, recover_features, relevancy_map, render, render_bruteforce, segment, GaussianPrimitive,
    PipelineConfig, QueryConfig, Raster, RenderSettings, SemanticBank,
};

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(cond: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: cond,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.detail = format!("{}; {:.2} s", out.detail, elapsed.as_secs_f64());
    if let Some(limit) = limit {
        if elapsed >= limit {
            out.pass = false;
            out.detail.push_str(&format!(" exceeds {} s", limit.as_secs()));
        }
    }
    out
}

/// 1. Semantic channels leave color and transmittance bit-identical.
fn color_invariance() -> Outcome {
    let settings = RenderSettings::default();
    let mut worst = String::new();
    for seed in 0..20u64 {
        let mut r = rng(1000 + seed);
        let m = r.random_range(1..=16u32);
        let n = r.random_range(1..=500usize);
        let scene = scene(&mut r, n, m);
        let cam = orbit_camera(&mut r, 64, 64, 48.0);
        let with = render(&scene, m as usize, &cam, &settings).unwrap();
        let without = render(&scene, 0, &cam, &settings).unwrap();
        let same = |a: &Raster<f32>, b: &Raster<f32>| a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits());
        if !same(&with.color, &without.color) || !same(&with.transmittance, &without.transmittance) {
            worst = format!("scene {seed} differs");
            break;
        }
    }
    check(worst.is_empty(), if worst.is_empty() { "20 scenes bit-identical".to_string() } else { worst })
}

struct OracleScene {
    gaussians: Vec<GaussianPrimitive>,
    m: usize,
    cam: semsplat::Camera,
}

fn oracle_scenes() -> Vec<OracleScene> {
    (0..50u64)
        .map(|seed| {
            let mut r = rng(2000 + seed);
            let m = r.random_range(1..=8u32);
            let n = r.random_range(1..=500usize);
            let gaussians = scene(&mut r, n, m);
            let cam = orbit_camera(&mut r, 64, 64, 48.0);
            OracleScene {
                gaussians,
                m: m as usize,
                cam,
            }
        })
        .collect()
}

/// 2. Tiled renderer matches the brute-force reference.
fn oracle_equivalence(scenes: &[OracleScene]) -> Outcome {
    let settings = RenderSettings::default();
    let mut worst = 0.0f64;
    for s in scenes {
        let tiled = render(&s.gaussians, s.m, &s.cam, &settings).unwrap();
        let reference = render_bruteforce(&s.gaussians, s.m, &s.cam, &settings).unwrap();
        worst = worst
            .max(max_abs_diff(tiled.color.data(), reference.color.data()))
            .max(max_abs_diff(
                tiled.semantic.as_ref().unwrap().data(),
                reference.semantic.as_ref().unwrap().data(),
            ))
            .max(max_abs_diff(tiled.transmittance.data(), reference.transmittance.data()));
    }
    check(worst <= 1e-5, format!("max |tiled - reference| = {worst:.3e} (tol 1e-5) over 50 scenes"))
}

/// 3. `Σ w_i + T_final = 1` per pixel. Every splat carries a nonzero index,
/// so the semantic channels sum to `Σ w_i`.
fn conservation(scenes: &[OracleScene]) -> Outcome {
    let settings = RenderSettings::default();
    let mut worst = 0.0f64;
    for s in scenes {
        let out = render(&s.gaussians, s.m, &s.cam, &settings).unwrap();
        let sem = out.semantic.as_ref().unwrap();
        for (e, t) in sem.pixels().zip(out.transmittance.data()) {
            let total: f64 = e.iter().map(|&v| v as f64).sum::<f64>() + *t as f64;
            worst = worst.max((total - 1.0).abs());
        }
    }
    check(worst <= 1e-6, format!("max |Σw + T - 1| = {worst:.3e} (tol 1e-6)"))
}

/// 4. Synthetic scene: render held-out view, recover features, query each
/// planted vector.
fn synthetic_segmentation() -> Outcome {
    let scene = generate(&SynthConfig::default()).unwrap();
    let cfg = PipelineConfig::default();
    let gaussians = scene.labeled_gaussians().unwrap();
    let out = render(&gaussians, scene.planted_bank.len(), &scene.heldout, &cfg.render).unwrap();
    let features = recover_features(out.semantic.as_ref().unwrap(), &scene.planted_bank).unwrap();
    let mut ious = Vec::new();
    for (j, gt) in scene.gt_masks.iter().enumerate() {
        let mut q = QueryConfig::new(scene.query(j), scene.canonicals.clone());
        q.temperature = 10.0;
        let mask = segment(&relevancy_map(&features, &q).unwrap(), 0.5).unwrap();
        ious.push(metrics::iou(&mask, gt).unwrap());
    }
    let min = ious.iter().copied().fold(1.0, f64::min);
    check(min >= 0.99, format!("per-query IoU {ious:.4?} (min {min:.4}, need >= 0.99)"))
}

/// 5. Relevancy numerics.
fn relevancy_numerics() -> Outcome {
    let d = 8;
    let e = |i: usize| -> Vec<f32> { (0..d).map(|k| if k == i { 1.0 } else { 0.0 }).collect() };
    let one_pixel = |f: Vec<f32>| FeatureMap::from_values(Raster::from_vec(1, 1, d, f).unwrap());

    let q = QueryConfig::new(e(0), vec![e(1)]);
    let aligned = relevancy_map(&one_pixel(e(0)), &q).unwrap().get(0, 0, 0);
    let exact = 1.0 / (1.0 + (-10.0f64).exp());
    let aligned_ok = (aligned - exact).abs() <= 1e-9 && (aligned - 0.9999546).abs() <= 1e-7;

    let anti: Vec<f32> = e(0).iter().map(|v| -v).collect();
    let floored = relevancy_map(&one_pixel(anti), &q).unwrap().get(0, 0, 0);

    let mut r = rng(5000);
    let mut violations = 0;
    for _ in 0..1000 {
        let dim = r.random_range(2..=16usize);
        let f = unit_f32(&mut r, dim);
        let query = unit_f32(&mut r, dim);
        let k = r.random_range(1..=5usize);
        let mut canon: Vec<Vec<f32>> = (0..k).map(|_| unit_f32(&mut r, dim)).collect();
        let before = relevancy_score(&f, &query, &canon, 10.0);
        canon.push(unit_f32(&mut r, dim));
        let after = relevancy_score(&f, &query, &canon, 10.0);
        if after > before {
            violations += 1;
        }
    }
    check(
        aligned_ok && floored == 0.0 && violations == 0,
        format!(
            "aligned {aligned:.10} vs sigmoid(10) {exact:.10}; anti-aligned {floored}; {violations}/1000 monotonicity violations; sigmoid(0) = {}",
            sigmoid(0.0)
        ),
    )
}

/// 6. K-Means objective, recovery and the cluster-count heuristic.
fn kmeans_properties() -> Outcome {
    let mut increases = 0;
    for seed in 0..100u64 {
        let mut r = rng(6000 + seed);
        let d = r.random_range(2..=16usize);
        let n = r.random_range(5..=200usize);
        let m = r.random_range(1..=n.min(12));
        let pts: Vec<Vec<f32>> = (0..n).map(|_| unit_f32(&mut r, d)).collect();
        let res = kmeans(&pts, m, seed, 100).unwrap();
        increases += res.objective_history.windows(2).filter(|w| w[1] > w[0]).count();
    }

    let mut imperfect = 0;
    for seed in 0..100u64 {
        let mut r = rng(6500 + seed);
        let (k, d) = (r.random_range(2..=8usize), 16);
        // centers are distinct basis vectors (pairwise distance √2); every
        // point lies within 0.1 of its center
        let mut truth = Vec::new();
        let mut pts = Vec::new();
        for c in 0..k {
            for _ in 0..r.random_range(3..=20) {
                let offset = unit_vector(&mut r, d);
                let radius = r.random_range(0.0..0.1);
                pts.push((0..d).map(|i| (f64::from(u8::from(i == c)) + radius * offset[i]) as f32).collect::<Vec<_>>());
                truth.push(c);
            }
        }
        let spread = 0.1;
        assert!(2f64.sqrt() >= 10.0 * spread);
        let res = kmeans(&pts, k, seed, 100).unwrap();
        if adjusted_rand_index(&truth, &res.assignments) != 1.0 {
            imperfect += 1;
        }
    }
    let count = compute_cluster_count(20, 2, 1.2).unwrap();
    check(
        increases == 0 && imperfect == 0 && count == 12,
        format!("{increases} objective increases over 100 runs; {imperfect}/100 runs with ARI < 1; compute_cluster_count(20, 2, 1.2) = {count}"),
    )
}

/// 7. One Gaussian from five cameras: same argmax channel wherever the
/// accumulated alpha exceeds 0.5.
fn view_invariance() -> Outcome {
    let mut r = rng(7000);
    let m = 6;
    let mut g = GaussianPrimitive::with_rgb([0.0; 3], [0.4, 0.25, 0.3], quaternion(&mut r), 0.95, [0.8, 0.3, 0.1]);
    g.semantic_index = 4;
    let mut channels = std::collections::BTreeSet::new();
    let mut covered = Vec::new();
    for _ in 0..5 {
        let cam = orbit_camera(&mut r, 64, 64, 48.0);
        let out = render(std::slice::from_ref(&g), m, &cam, &RenderSettings::default()).unwrap();
        let sem = out.semantic.as_ref().unwrap();
        let mut n = 0;
        for (e, &t) in sem.pixels().zip(out.transmittance.data()) {
            if 1.0 - t as f64 > 0.5 {
                let arg = (0..m).max_by(|&a, &b| e[a].total_cmp(&e[b]).then(b.cmp(&a))).unwrap();
                channels.insert(arg);
                n += 1;
            }
        }
        covered.push(n);
    }
    let ok = channels.len() == 1 && channels.contains(&3) && covered.iter().all(|&n| n > 0);
    check(ok, format!("argmax channels {channels:?} over {covered:?} covered pixels per camera"))
}

/// 8. Bit-exact round trips, 100 random payloads per format.
fn io_round_trips() -> Outcome {
    let mut r = rng(8000);
    let mut failures = Vec::new();
    let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();

    for i in 0..100 {
        let m = r.random_range(0..=20u32);
        let n = r.random_range(0..=50usize);
        let degree = r.random_range(0..=3usize);
        let gs: Vec<GaussianPrimitive> = (0..n)
            .map(|_| {
                let mut g = gaussian(&mut r, m);
                g.sh = (0..(degree + 1) * (degree + 1)).map(|_| [0; 3].map(|_: i32| r.random_range(-3.0f32..3.0))).collect();
                g.opacity = r.random_range(1e-4f32..0.9999);
                g
            })
            .collect();
        let back = io::decode_scene_ply(&io::encode_scene_ply(&gs).unwrap()).unwrap();
        let same = back.len() == gs.len()
            && back.iter().zip(&gs).all(|(a, b)| {
                bits(&a.position) == bits(&b.position)
                    && a.opacity.to_bits() == b.opacity.to_bits()
                    && bits(&a.scale) == bits(&b.scale)
                    && bits(&a.rotation) == bits(&b.rotation)
                    && bits(&a.sh.concat()) == bits(&b.sh.concat())
                    && a.semantic_index == b.semantic_index
            });
        if !same {
            failures.push(format!("ply #{i}"));
        }
    }

    for i in 0..100 {
        let rows = r.random_range(0..=40usize);
        let cols = r.random_range(1..=64usize);
        // arbitrary bit patterns, NaN payloads included
        let data: Vec<f32> = (0..rows * cols).map(|_| f32::from_bits(r.random())).collect();
        let m = io::EmbeddingMatrix::new(rows, cols, data).unwrap();
        let back = io::decode_embeddings(&io::encode_embeddings(&m).unwrap()).unwrap();
        if !back.bit_eq(&m) {
            failures.push(format!("embeddings #{i}"));
        }
    }

    for i in 0..100 {
        let (w, h) = (r.random_range(1..=48usize), r.random_range(1..=48usize));
        let max = if i % 2 == 0 { 65535 } else { r.random_range(1..=400u32) };
        let map = Raster::from_vec(w, h, 1, (0..w * h).map(|_| r.random_range(0..=max)).collect()).unwrap();
        let png = io::decode_label_map(&io::encode_label_map_png(&map).unwrap()).unwrap();
        let pgm = io::decode_label_map(&io::encode_label_map_pgm(&map).unwrap()).unwrap();
        if png != map || pgm != map {
            failures.push(format!("label map #{i}"));
        }
    }

    for i in 0..100 {
        let dim = r.random_range(1..=32usize);
        let m = r.random_range(0..=24usize);
        let rows: Vec<Vec<f32>> = (0..m).map(|_| unit_f32(&mut r, dim)).collect();
        let mut bank = if m == 0 {
            SemanticBank::empty(dim, 0, 1.2)
        } else {
            SemanticBank::from_rows(&rows).unwrap()
        };
        bank.seed = r.random();
        bank.lambda = r.random_range(0.1..5.0);
        bank.iterations = r.random_range(0..1000);
        let back = io::decode_bank(&io::encode_bank(&bank).unwrap()).unwrap();
        let same = back.len() == bank.len()
            && back.dim() == bank.dim()
            && bits(back.centroids()) == bits(bank.centroids())
            && back.seed == bank.seed
            && back.lambda.to_bits() == bank.lambda.to_bits()
            && back.iterations == bank.iterations;
        if !same {
            failures.push(format!("bank #{i}"));
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            "PLY, SEGEMB1, label map (PNG + PGM), bank: 100 payloads each bit-exact".to_string()
        } else {
            format!("mismatches: {failures:?}")
        },
    )
}

/// 9. Informational timing: 256², 65,536 Gaussians, M = 32.
fn performance() -> (Outcome, f64) {
    let mut r = rng(9000);
    let scene: Vec<GaussianPrimitive> = (0..65_536)
        .map(|_| {
            let mut g = gaussian(&mut r, 32);
            g.scale = g.scale.map(|s| s * 0.4);
            g
        })
        .collect();
    let cam = semsplat::Camera::look_at([0.0, 0.0, -4.0], [0.0; 3], [0.0, 1.0, 0.0], 192.0, 256, 256, 0.1, 100.0).unwrap();
    let settings = RenderSettings::default();
    let _ = render(&scene, 32, &cam, &settings).unwrap();
    let start = Instant::now();
    let out = render(&scene, 32, &cam, &settings).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let covered = out.transmittance.data().iter().filter(|&&t| t < 0.5).count();
    (
        check(
            secs < 2.0,
            format!(
                "{secs:.3} s on {} threads (target < 2 s), {covered} of 65536 pixels over half covered",
                rayon::current_num_threads()
            ),
        ),
        secs,
    )
}

fn main() {
    // `cargo test -- <filter>` passes arguments; ignore them
    let mut failed = Vec::new();
    let mut report = |id: &str, name: &str, required: bool, out: Outcome| {
        let status = match (out.pass, required) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "SLOW",
        };
        println!("acceptance {id} {name}: {status} ({})", out.detail);
        if !out.pass && required {
            failed.push(id.to_string());
        }
    };

    let secs = |s: u64| Some(Duration::from_secs(s));
    report("1", "color invariance", true, timed(secs(10), color_invariance));
    let scenes = oracle_scenes();
    report("2", "tiled vs brute-force oracle", true, timed(secs(60), || oracle_equivalence(&scenes)));
    report("3", "compositing conservation", true, timed(None, || conservation(&scenes)));
    report("4", "synthetic end-to-end segmentation", true, timed(secs(30), synthetic_segmentation));
    report("5", "relevancy numerics", true, timed(secs(5), relevancy_numerics));
    report("6", "k-means", true, timed(secs(30), kmeans_properties));
    report("7", "semantic view invariance", true, timed(None, view_invariance));
    report("8", "io round trips", true, timed(None, io_round_trips));
    let (perf, _) = performance();
    report("9", "performance (informational)", false, perf);

    if failed.is_empty() {
        println!("acceptance: all required criteria pass");
    } else {
        println!("acceptance: failing criteria {}", failed.join(", "));
        std::process::exit(1);
    }
}
