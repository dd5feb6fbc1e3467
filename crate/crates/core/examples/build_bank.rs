//! Builds the shared semantic bank from per-view masks and embeddings:
//! NMS, pooled K-Means with `M = round(λ·N/K)`, and per-view index maps.
//!
//!     cargo run --example build_bank

use semsplat::synth::{generate, SynthConfig};
use semsplat::{compute_cluster_count, MaskAnnotation, PipelineConfig, ViewAnnotation};

fn main() -> semsplat::Result<()> {
    let scene = generate(&SynthConfig {
        noise: 0.1,
        ..Default::default()
    })?;

    // give view 0 a redundant, lower-scoring mask so NMS has work to do
    let mut views = scene.views.clone();
    let v = &views[0];
    let mut masks = v.masks().to_vec();
    let mut embeddings = v.embeddings().to_vec();
    masks.push(MaskAnnotation::new(4, v.width(), v.height(), masks[0].bitmap().to_vec(), 0.3)?);
    embeddings.push(embeddings[0].clone());
    views[0] = ViewAnnotation::new(v.view_index, v.width(), v.height(), masks, embeddings)?;

    let cfg = PipelineConfig::default();
    let n: usize = views.iter().map(|v| v.masks().len()).sum();
    println!("{n} masks before NMS over {} views", views.len());
    let (bank, maps) = cfg.build_bank(views)?;
    println!("bank: M = {} entries of dimension {}", bank.len(), bank.dim());

    for map in &maps {
        let mut counts = vec![0usize; bank.len() + 1];
        for &k in map.values.data() {
            counts[k as usize] += 1;
        }
        println!("view {} pixels per index (0 = background): {counts:?}", map.view_index);
    }

    println!("cluster counts for K = 2 views at λ = {}:", cfg.lambda);
    for total in [1, 4, 10, 20, 50] {
        println!("  N = {total:>2} -> M = {}", compute_cluster_count(total, 2, cfg.lambda)?);
    }
    Ok(())
}
