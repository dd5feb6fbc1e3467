//! Writes a scene in the common binary PLY splat layout with the extra
//! `semantic_index` property, prints the header and reads it back.
//!
//!     cargo run --example ply_io

use semsplat::io::{decode_scene_ply, encode_scene_ply};
use semsplat::GaussianPrimitive;

fn main() -> semsplat::Result<()> {
    let scene: Vec<GaussianPrimitive> = (0..5)
        .map(|i| {
            let t = i as f32 / 4.0;
            let mut g = GaussianPrimitive::with_rgb([t, 1.0 - t, 2.0], [0.05, 0.1, 0.02], [1.0, 0.0, 0.0, 0.0], 0.2 + 0.15 * i as f32, [t, 0.5, 1.0 - t]);
            // one band of view-dependent color
            g.sh.extend([[0.1, 0.0, -0.1], [0.0, 0.2, 0.0], [-0.05, 0.0, 0.05]]);
            g.semantic_index = i % 3;
            g
        })
        .collect();

    let bytes = encode_scene_ply(&scene)?;
    let header_end = bytes.windows(11).position(|w| w == b"end_header\n").unwrap() + 11;
    print!("{}", String::from_utf8_lossy(&bytes[..header_end]));
    println!("({} bytes of vertex data)", bytes.len() - header_end);

    let back = decode_scene_ply(&bytes)?;
    assert_eq!(back, scene);
    for g in &back {
        println!(
            "pos {:?} opacity {:.3} sh degree {:?} semantic_index {}",
            g.position,
            g.opacity,
            g.sh_degree(),
            g.semantic_index
        );
    }
    Ok(())
}
