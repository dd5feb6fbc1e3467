//! Renders the synthetic scene from its held-out camera and segments each
//! planted object by open-vocabulary query.
//!
//!     cargo run --release --example synthetic_segmentation

use semsplat::synth::{generate, SynthConfig};
use semsplat::{metrics, recover_features, relevancy_map, render, segment, PipelineConfig};

fn main() -> semsplat::Result<()> {
    let scene = generate(&SynthConfig::default())?;
    let cfg = PipelineConfig::default();
    let gaussians = scene.labeled_gaussians()?;
    let buffers = render(&gaussians, scene.planted_bank.len(), &scene.heldout, &cfg.render)?;
    let features = recover_features(buffers.semantic.as_ref().expect("bank is non-empty"), &scene.planted_bank)?;

    for (j, gt) in scene.gt_masks.iter().enumerate() {
        let query = cfg.query_config(scene.query(j), scene.canonicals.clone());
        let relevancy = relevancy_map(&features, &query)?;
        let mask = segment(&relevancy, cfg.mask_threshold)?;
        let iou = metrics::iou(&mask, gt)?;
        let area = mask.data().iter().filter(|&&m| m).count();
        println!("object {}: {area} px selected, IoU {iou:.4}", j + 1);
    }
    Ok(())
}
