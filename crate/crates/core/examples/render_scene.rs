//! Renders a small scene with the tile rasterizer, checks it against the
//! brute-force reference and writes the color image plus an argmax view of
//! the semantic channels.
//!
//!     cargo run --release --example render_scene [OUT_DIR]

use std::path::PathBuf;

use semsplat::io::{write_rgb_png, write_buffer};
use semsplat::{render, render_bruteforce, Camera, GaussianPrimitive, Raster, RenderSettings};

const PALETTE: [[f32; 3]; 4] = [[0.9, 0.2, 0.2], [0.2, 0.8, 0.3], [0.2, 0.3, 0.9], [0.9, 0.8, 0.2]];

fn main() -> semsplat::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("semsplat-render"));

    // four rings of elongated splats, one bank index per ring
    let mut scene = Vec::new();
    for ring in 0..4u32 {
        let radius = 0.3 + 0.25 * ring as f32;
        for i in 0..48 {
            let a = i as f32 / 48.0 * std::f32::consts::TAU;
            let half = a / 2.0;
            let mut g = GaussianPrimitive::with_rgb(
                [radius * a.cos(), radius * a.sin(), 0.1 * ring as f32],
                [0.06, 0.02, 0.02],
                [half.cos(), 0.0, 0.0, half.sin()],
                0.8,
                PALETTE[ring as usize],
            );
            g.semantic_index = ring + 1;
            scene.push(g);
        }
    }
    let cam = Camera::look_at([0.0, -1.0, -3.5], [0.0; 3], [0.0, 1.0, 0.0], 180.0, 256, 256, 0.1, 100.0)?;
    let settings = RenderSettings::default();

    let start = std::time::Instant::now();
    let buffers = render(&scene, 4, &cam, &settings)?;
    println!("tiled render: {:.1} ms", start.elapsed().as_secs_f64() * 1e3);
    let reference = render_bruteforce(&scene, 4, &cam, &settings)?;
    let diff = buffers
        .color
        .data()
        .iter()
        .zip(reference.color.data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f32, f32::max);
    println!("max |tiled - brute force| over color: {diff:e}");

    let semantic = buffers.semantic.as_ref().expect("bank size 4");
    let labels: Vec<f32> = semantic
        .pixels()
        .flat_map(|e| {
            let (k, w) = e.iter().enumerate().fold((0, 0.0f32), |best, (k, &w)| if w > best.1 { (k, w) } else { best });
            if w > 0.5 { PALETTE[k] } else { [0.0; 3] }
        })
        .collect();
    let labels = Raster::from_vec(semantic.width(), semantic.height(), 3, labels)?;

    write_rgb_png(out.join("color.png"), &buffers.color)?;
    write_rgb_png(out.join("labels.png"), &labels)?;
    write_buffer(out.join("semantic.bin"), semantic)?;
    println!("wrote color.png, labels.png and semantic.bin to {}", out.display());
    Ok(())
}
