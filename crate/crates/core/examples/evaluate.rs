//! Segmentation IoU plus PSNR/SSIM of a degraded render against a clean
//! one, collected into the JSON report the `eval` command writes.
//!
//!     cargo run --release --example evaluate

use std::collections::BTreeMap;

use semsplat::metrics::{iou, psnr, ssim, EvalReport};
use semsplat::synth::{generate, SynthConfig};
use semsplat::{recover_features, relevancy_map, render, segment, PipelineConfig, RenderSettings};

fn main() -> semsplat::Result<()> {
    let scene = generate(&SynthConfig::default())?;
    let cfg = PipelineConfig::default();
    let gaussians = scene.labeled_gaussians()?;
    let clean = render(&gaussians, scene.planted_bank.len(), &scene.heldout, &cfg.render)?;

    // stronger screen-space blur stands in for a lower quality reconstruction
    let blurred_settings = RenderSettings {
        low_pass: 2.0,
        ..cfg.render.clone()
    };
    let blurred = render(&gaussians, scene.planted_bank.len(), &scene.heldout, &blurred_settings)?;

    let features = recover_features(blurred.semantic.as_ref().expect("non-empty bank"), &scene.planted_bank)?;
    let mut per_query = BTreeMap::new();
    for (j, gt) in scene.gt_masks.iter().enumerate() {
        let q = cfg.query_config(scene.query(j), scene.canonicals.clone());
        let mask = segment(&relevancy_map(&features, &q)?, q.mask_threshold)?;
        per_query.insert(format!("object_{}", j + 1), iou(&mask, gt)?);
    }

    let report = EvalReport::new(
        per_query,
        Some(psnr(&blurred.color, &clean.color)?),
        Some(ssim(&blurred.color, &clean.color)?),
        cfg.digest(),
    );
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}
