//! Binary little-endian PLY scenes in the usual Gaussian-splat layout:
//! `x y z`, `f_dc_0..2`, `f_rest_*` (channel-major), `opacity` as a logit,
//! `scale_0..2` as logs, `rot_0..3` (w first) and an integer `semantic_index`.
//!
//! The writer stores `opacity` and `scale_*` as `double` so that the
//! logit/log encoding inverts to the identical `f32`. The reader accepts any
//! scalar type for every property.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::GaussianPrimitive;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, Scalar::F32 | Scalar::F64)
    }
}

struct Property {
    name: String,
    ty: Scalar,
    offset: usize,
}

struct Header {
    count: usize,
    stride: usize,
    props: Vec<Property>,
    body: usize,
}

fn header_err(msg: impl Into<String>) -> Error {
    Error::parse("PLY header", msg)
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    const END: &[u8] = b"end_header\n";
    let end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| header_err("missing end_header"))?;
    let text = std::str::from_utf8(&bytes[..end]).map_err(|_| header_err("header is not ASCII"))?;
    let mut lines = text.lines().map(str::trim_end);
    if lines.next() != Some("ply") {
        return Err(Error::parse("PLY magic", "file does not start with 'ply'"));
    }

    let mut format_seen = false;
    let mut vertex: Option<(usize, Vec<Property>)> = None;
    let mut current_is_vertex = false;
    let mut seen_after_vertex = false;
    for line in lines {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", fmt, _version] => {
                if *fmt != "binary_little_endian" {
                    return Err(Error::parse("PLY format", format!("unsupported format '{fmt}'")));
                }
                format_seen = true;
            }
            ["element", name, count] => {
                let count: usize = count
                    .parse()
                    .map_err(|_| Error::parse(format!("PLY element {name}"), format!("bad count '{count}'")))?;
                if *name == "vertex" {
                    if vertex.is_some() {
                        return Err(Error::parse("PLY element vertex", "declared twice"));
                    }
                    vertex = Some((count, Vec::new()));
                    current_is_vertex = true;
                } else {
                    // elements after the vertex block are ignored; before it they would shift the body
                    if vertex.is_none() && count > 0 {
                        return Err(Error::parse(
                            format!("PLY element {name}"),
                            "non-empty elements before vertex are not supported",
                        ));
                    }
                    if vertex.is_some() {
                        seen_after_vertex = true;
                    }
                    current_is_vertex = false;
                }
            }
            ["property", "list", ..] => {
                if current_is_vertex {
                    return Err(Error::parse("PLY vertex property", "list properties are not supported"));
                }
            }
            ["property", ty, name] => {
                if current_is_vertex {
                    let ty = Scalar::parse(ty)
                        .ok_or_else(|| Error::parse(format!("PLY property {name}"), format!("unknown type '{ty}'")))?;
                    let props = &mut vertex.as_mut().unwrap().1;
                    if props.iter().any(|p| p.name == *name) {
                        return Err(Error::parse(format!("PLY property {name}"), "declared twice"));
                    }
                    let offset = props.last().map_or(0, |p: &Property| p.offset + p.ty.size());
                    props.push(Property {
                        name: name.to_string(),
                        ty,
                        offset,
                    });
                }
            }
            _ => return Err(header_err(format!("unrecognized line '{line}'"))),
        }
    }
    let _ = seen_after_vertex;
    if !format_seen {
        return Err(Error::parse("PLY format", "missing format line"));
    }
    let (count, props) = vertex.ok_or_else(|| Error::parse("PLY element vertex", "missing"))?;
    let stride = props.last().map_or(0, |p| p.offset + p.ty.size());
    Ok(Header {
        count,
        stride,
        props,
        body: end + END.len(),
    })
}

impl Header {
    fn find(&self, name: &str) -> Option<&Property> {
        self.props.iter().find(|p| p.name == name)
    }

    fn require(&self, name: &str) -> Result<&Property> {
        self.find(name)
            .ok_or_else(|| Error::parse(format!("PLY property {name}"), "required property is missing"))
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn decode_scene_ply(bytes: &[u8]) -> Result<Vec<GaussianPrimitive>> {
    let h = parse_header(bytes)?;
    let pos = ["x", "y", "z"].map(|n| h.require(n)).into_iter().collect::<Result<Vec<_>>>()?;
    let dc = ["f_dc_0", "f_dc_1", "f_dc_2"].map(|n| h.require(n)).into_iter().collect::<Result<Vec<_>>>()?;
    let opacity = h.require("opacity")?;
    let scale = ["scale_0", "scale_1", "scale_2"].map(|n| h.require(n)).into_iter().collect::<Result<Vec<_>>>()?;
    let rot = ["rot_0", "rot_1", "rot_2", "rot_3"].map(|n| h.require(n)).into_iter().collect::<Result<Vec<_>>>()?;
    let semantic = h.find("semantic_index");
    if let Some(p) = semantic {
        if !p.ty.is_integer() {
            return Err(Error::parse("PLY property semantic_index", "must be an integer type"));
        }
    }

    let mut rest = Vec::new();
    while let Some(p) = h.find(&format!("f_rest_{}", rest.len())) {
        rest.push(p);
    }
    if h.props.iter().filter(|p| p.name.starts_with("f_rest_")).count() != rest.len() {
        return Err(Error::parse("PLY property f_rest", "indices are not contiguous from 0"));
    }
    if rest.len() % 3 != 0 {
        return Err(Error::parse("PLY property f_rest", format!("{} values is not a multiple of 3", rest.len())));
    }
    let per_channel = rest.len() / 3;
    let coeffs = per_channel + 1;
    let degree = (coeffs as f64).sqrt().round() as usize;
    if degree * degree != coeffs || degree > 4 {
        return Err(Error::parse(
            "PLY property f_rest",
            format!("{} coefficients per channel is not a supported SH layout", coeffs),
        ));
    }

    let body = &bytes[h.body..];
    let need = h.count.checked_mul(h.stride).ok_or_else(|| header_err("vertex count overflows"))?;
    if body.len() < need {
        return Err(Error::parse(
            "PLY vertex payload",
            format!("truncated: header declares {need} bytes, found {}", body.len()),
        ));
    }

    let mut out = Vec::with_capacity(h.count);
    for (i, rec) in body[..need].chunks_exact(h.stride.max(1)).take(h.count).enumerate() {
        let get = |p: &Property| p.ty.read(&rec[p.offset..]);
        let mut sh = vec![[0f32; 3]; coeffs];
        for c in 0..3 {
            sh[0][c] = get(dc[c]) as f32;
            for k in 0..per_channel {
                sh[k + 1][c] = get(rest[c * per_channel + k]) as f32;
            }
        }
        let mut q = [0f64; 4];
        for (k, p) in rot.iter().enumerate() {
            q[k] = get(p);
        }
        let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::parse(format!("PLY vertex {i} rotation"), "quaternion has zero or non-finite norm"));
        }
        if (norm - 1.0).abs() > 1e-6 {
            q.iter_mut().for_each(|v| *v /= norm);
        }
        let index = semantic.map_or(0.0, |p| get(p));
        if index < 0.0 || index > u32::MAX as f64 {
            return Err(Error::parse(format!("PLY vertex {i} semantic_index"), format!("{index} out of range")));
        }
        out.push(GaussianPrimitive {
            position: [get(pos[0]) as f32, get(pos[1]) as f32, get(pos[2]) as f32],
            opacity: sigmoid(get(opacity)) as f32,
            scale: [0, 1, 2].map(|k| get(scale[k]).exp() as f32),
            rotation: q.map(|v| v as f32),
            sh,
            semantic_index: index as u32,
        });
    }
    Ok(out)
}

/// Fails if the primitives disagree on SH degree.
pub fn encode_scene_ply(gaussians: &[GaussianPrimitive]) -> Result<Vec<u8>> {
    let coeffs = gaussians.first().map_or(1, |g| g.sh.len());
    if coeffs == 0 {
        return Err(Error::invalid("gaussian has no SH coefficients"));
    }
    if let Some((i, _)) = gaussians.iter().enumerate().find(|(_, g)| g.sh.len() != coeffs) {
        return Err(Error::invalid(format!("gaussian {i} has a different SH degree than gaussian 0")));
    }
    let per_channel = coeffs - 1;

    let mut header = String::from("ply\nformat binary_little_endian 1.0\n");
    header.push_str(&format!("element vertex {}\n", gaussians.len()));
    for n in ["x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2"] {
        header.push_str(&format!("property float {n}\n"));
    }
    for k in 0..3 * per_channel {
        header.push_str(&format!("property float f_rest_{k}\n"));
    }
    header.push_str("property double opacity\n");
    for n in ["scale_0", "scale_1", "scale_2"] {
        header.push_str(&format!("property double {n}\n"));
    }
    for n in ["rot_0", "rot_1", "rot_2", "rot_3"] {
        header.push_str(&format!("property float {n}\n"));
    }
    header.push_str("property uint semantic_index\nend_header\n");

    let stride = 4 * (6 + 3 * per_channel) + 8 * 4 + 4 * 4 + 4;
    let mut out = Vec::with_capacity(header.len() + stride * gaussians.len());
    out.extend_from_slice(header.as_bytes());
    for g in gaussians {
        let f = |out: &mut Vec<u8>, v: f32| out.extend_from_slice(&v.to_le_bytes());
        let d = |out: &mut Vec<u8>, v: f64| out.extend_from_slice(&v.to_le_bytes());
        g.position.iter().for_each(|&v| f(&mut out, v));
        g.sh[0].iter().for_each(|&v| f(&mut out, v));
        for c in 0..3 {
            for k in 0..per_channel {
                f(&mut out, g.sh[k + 1][c]);
            }
        }
        let o = g.opacity as f64;
        d(&mut out, (o / (1.0 - o)).ln());
        g.scale.iter().for_each(|&s| d(&mut out, (s as f64).ln()));
        g.rotation.iter().for_each(|&v| f(&mut out, v));
        out.extend_from_slice(&g.semantic_index.to_le_bytes());
    }
    Ok(out)
}

pub fn read_scene_ply(path: impl AsRef<Path>) -> Result<Vec<GaussianPrimitive>> {
    decode_scene_ply(&super::read_bytes(path.as_ref())?)
}

pub fn write_scene_ply(path: impl AsRef<Path>, gaussians: &[GaussianPrimitive]) -> Result<()> {
    super::write_bytes(path.as_ref(), &encode_scene_ply(gaussians)?)
}
