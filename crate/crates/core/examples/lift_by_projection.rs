//! Labels Gaussians that are not pixel aligned by projecting their centers
//! into the annotated views and reading the index map under them.
//!
//!     cargo run --example lift_by_projection

use semsplat::synth::{generate, SynthConfig, PLANE_DEPTH};
use semsplat::{assign_by_projection, GaussianPrimitive};

fn main() -> semsplat::Result<()> {
    let scene = generate(&SynthConfig::default())?;

    // a coarse, jittered grid on the plane plus a few points no view sees
    let mut gaussians = Vec::new();
    for iy in 0..9 {
        for ix in 0..9 {
            let x = -1.6 + 0.4 * ix as f32 + 0.013 * iy as f32;
            let y = -1.6 + 0.4 * iy as f32;
            gaussians.push(GaussianPrimitive::with_rgb([x, y, PLANE_DEPTH as f32], [0.05; 3], [1.0, 0.0, 0.0, 0.0], 0.9, [0.5; 3]));
        }
    }
    gaussians.push(GaussianPrimitive::with_rgb([10.0, 0.0, PLANE_DEPTH as f32], [0.05; 3], [1.0, 0.0, 0.0, 0.0], 0.9, [0.5; 3]));
    gaussians.push(GaussianPrimitive::with_rgb([0.0, 0.0, -1.0], [0.05; 3], [1.0, 0.0, 0.0, 0.0], 0.9, [0.5; 3]));

    let lifted = assign_by_projection(&gaussians, &scene.input_cameras, &scene.planted_maps)?;
    for row in lifted[..81].chunks(9) {
        println!("{}", row.iter().map(|g| g.semantic_index.to_string()).collect::<Vec<_>>().join(" "));
    }
    println!("outside every view: {:?}", lifted[81..].iter().map(|g| g.semantic_index).collect::<Vec<_>>());
    Ok(())
}
