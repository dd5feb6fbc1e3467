//! Recovers a dense feature map from a rendered semantic buffer and scores
//! it against a text-style query and canonical embeddings. Writes one
//! relevancy heatmap and mask per query.
//!
//!     cargo run --release --example open_vocab_query [OUT_DIR]

use std::path::PathBuf;

use semsplat::io::{write_heatmap_png, write_mask_png};
use semsplat::synth::{generate, SynthConfig};
use semsplat::{recover_features, relevancy_map, render, segment, PipelineConfig};

fn main() -> semsplat::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("semsplat-query"));
    let scene = generate(&SynthConfig::default())?;
    let cfg = PipelineConfig::default();

    let buffers = render(&scene.labeled_gaussians()?, scene.planted_bank.len(), &scene.heldout, &cfg.render)?;
    let features = recover_features(buffers.semantic.as_ref().expect("non-empty bank"), &scene.planted_bank)?;

    // a query halfway between objects 2 and 3 selects neither strongly
    let mixed: Vec<f32> = {
        let v: Vec<f32> = scene.query(1).iter().zip(scene.query(2)).map(|(a, b)| a + b).collect();
        let n = v.iter().map(|x| x * x).sum::<f32>().sqrt();
        v.iter().map(|x| x / n).collect()
    };
    let queries = [("object_1", scene.query(0)), ("object_2", scene.query(1)), ("object_3", scene.query(2)), ("mixed_2_3", mixed)];

    for (name, q) in queries {
        let qc = cfg.query_config(q, scene.canonicals.clone());
        let relevancy = relevancy_map(&features, &qc)?;
        let mask = segment(&relevancy, qc.mask_threshold)?;
        let peak = relevancy.data().iter().copied().fold(0.0, f64::max);
        let selected = mask.data().iter().filter(|&&m| m).count();
        println!("{name:>10}: peak relevancy {peak:.6}, {selected} pixels selected");
        write_heatmap_png(out.join(format!("{name}_relevancy.png")), &relevancy)?;
        write_mask_png(out.join(format!("{name}_mask.png")), &mask)?;
    }
    println!("heatmaps and masks in {}", out.display());
    Ok(())
}
