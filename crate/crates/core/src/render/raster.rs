use rayon::prelude::*;

use super::{project_gaussian, ProjectedGaussian, RenderBuffers, RenderSettings, MAX_ALPHA};
use crate::error::{Error, Result};
use crate::model::{Camera, GaussianPrimitive, Raster};

fn validate_inputs(gaussians: &[GaussianPrimitive], bank_size: usize, cam: &Camera, settings: &RenderSettings) -> Result<()> {
    settings.validate()?;
    cam.validate()?;
    let limit = (bank_size > 0).then_some(bank_size);
    for (i, g) in gaussians.iter().enumerate() {
        g.validate(limit)
            .map_err(|e| Error::invalid(format!("gaussian {i}: {e}")))?;
    }
    Ok(())
}

/// Projects every Gaussian and orders the survivors front to back by
/// `(depth, primitive_id)`.
fn project_sorted(gaussians: &[GaussianPrimitive], cam: &Camera, settings: &RenderSettings) -> Vec<ProjectedGaussian> {
    let mut projected: Vec<ProjectedGaussian> = gaussians
        .par_iter()
        .enumerate()
        .filter_map(|(i, g)| project_gaussian(g, i, cam, settings))
        .collect();
    projected.sort_by(|a, b| a.depth.total_cmp(&b.depth).then(a.primitive_id.cmp(&b.primitive_id)));
    projected
}

/// Front-to-back compositing of one pixel. `semantic` receives the blended
/// one-hot weights (empty slice for color-only). Returns color before the
/// background term and the final transmittance.
#[inline]
fn composite_pixel<'a>(
    px: f64,
    py: f64,
    splats: impl Iterator<Item = &'a ProjectedGaussian>,
    settings: &RenderSettings,
    stop: f64,
    semantic: &mut [f64],
) -> ([f64; 3], f64) {
    let mut color = [0.0f64; 3];
    let mut t = 1.0f64;
    for g in splats {
        let alpha = g.alpha_at(px, py).min(MAX_ALPHA);
        if alpha < settings.alpha_min {
            continue;
        }
        let w = alpha * t;
        for (c, gc) in color.iter_mut().zip(g.color) {
            *c += gc * w;
        }
        if g.semantic_index > 0 && !semantic.is_empty() {
            semantic[g.semantic_index as usize - 1] += w;
        }
        t *= 1.0 - alpha;
        if t < stop {
            break;
        }
    }
    (color, t)
}

struct PixelOut {
    color: [f32; 3],
    transmittance: f32,
}

fn finish(color: [f64; 3], t: f64, settings: &RenderSettings) -> PixelOut {
    PixelOut {
        color: [0, 1, 2].map(|c| (color[c] + t * settings.background[c]) as f32),
        transmittance: t as f32,
    }
}

fn assemble(width: usize, height: usize, bank_size: usize, pixels: Vec<(usize, usize, PixelOut, Vec<f64>)>) -> RenderBuffers {
    let mut color = Raster::filled(width, height, 3, 0.0f32);
    let mut transmittance = Raster::filled(width, height, 1, 1.0f32);
    let mut semantic = (bank_size > 0).then(|| Raster::filled(width, height, bank_size, 0.0f32));
    for (x, y, out, sem) in pixels {
        color.pixel_mut(x, y).copy_from_slice(&out.color);
        transmittance.set(x, y, 0, out.transmittance);
        if let Some(s) = semantic.as_mut() {
            for (dst, v) in s.pixel_mut(x, y).iter_mut().zip(sem) {
                *dst = v as f32;
            }
        }
    }
    RenderBuffers {
        color,
        semantic,
        transmittance,
    }
}

/// Tile-based render of color and, when `bank_size > 0`, the `M`-channel
/// semantic buffer.
///
/// Splats are binned into `tile_size²` tiles by their alpha support and
/// composited front to back in `(depth, primitive_id)` order. Tiles are
/// processed in parallel; each pixel's result depends only on its own
/// ordered splat list, so output bits do not depend on the worker count.
/// Semantic indices are ignored when `bank_size` is 0.
pub fn render(gaussians: &[GaussianPrimitive], bank_size: usize, cam: &Camera, settings: &RenderSettings) -> Result<RenderBuffers> {
    validate_inputs(gaussians, bank_size, cam, settings)?;
    let (width, height) = (cam.width as usize, cam.height as usize);
    let ts = settings.tile_size;
    let tiles_x = width.div_ceil(ts);
    let tiles_y = height.div_ceil(ts);

    let projected = project_sorted(gaussians, cam, settings);
    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); tiles_x * tiles_y];
    for (i, g) in projected.iter().enumerate() {
        let [x0, y0, x1, y1] = g.pixel_rect;
        for ty in y0 / ts..=y1 / ts {
            for tx in x0 / ts..=x1 / ts {
                bins[ty * tiles_x + tx].push(i as u32);
            }
        }
    }

    let tiles: Vec<Vec<(usize, usize, PixelOut, Vec<f64>)>> = bins
        .par_iter()
        .enumerate()
        .map(|(tile, list)| {
            let (tx, ty) = (tile % tiles_x, tile / tiles_x);
            let xs = tx * ts..((tx + 1) * ts).min(width);
            let ys = ty * ts..((ty + 1) * ts).min(height);
            let mut out = Vec::with_capacity(xs.len() * ys.len());
            for y in ys {
                for x in xs.clone() {
                    let mut sem = vec![0.0f64; bank_size];
                    let (c, t) = composite_pixel(
                        x as f64 + 0.5,
                        y as f64 + 0.5,
                        list.iter().map(|&i| &projected[i as usize]),
                        settings,
                        settings.transmittance_stop,
                        &mut sem,
                    );
                    out.push((x, y, finish(c, t, settings), sem));
                }
            }
            out
        })
        .collect();

    Ok(assemble(width, height, bank_size, tiles.into_iter().flatten().collect()))
}

/// Reference renderer: every pixel visits every projected Gaussian in global
/// `(depth, primitive_id)` order, with no tiling or binning. Same alpha
/// threshold, clamp and early-termination rule as [`render`]; set
/// `transmittance_stop` to 0 to composite every splat.
pub fn render_bruteforce(
    gaussians: &[GaussianPrimitive],
    bank_size: usize,
    cam: &Camera,
    settings: &RenderSettings,
) -> Result<RenderBuffers> {
    validate_inputs(gaussians, bank_size, cam, settings)?;
    let (width, height) = (cam.width as usize, cam.height as usize);
    let projected = project_sorted(gaussians, cam, settings);
    let pixels: Vec<_> = (0..width * height)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (i % width, i / width);
            let mut sem = vec![0.0f64; bank_size];
            let (c, t) = composite_pixel(x as f64 + 0.5, y as f64 + 0.5, projected.iter(), settings, settings.transmittance_stop, &mut sem);
            (x, y, finish(c, t, settings), sem)
        })
        .collect();
    Ok(assemble(width, height, bank_size, pixels))
}
