use std::path::Path;

use super::binary::{dim_u32, push_f32s, Reader};
use crate::error::{Error, Result};
use crate::model::Raster;

const MAGIC: &[u8; 8] = b"SEGIMG1\0";

pub fn encode_buffer(buf: &Raster<f32>) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(20 + buf.data().len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&dim_u32(buf.height(), "height")?.to_le_bytes());
    out.extend_from_slice(&dim_u32(buf.width(), "width")?.to_le_bytes());
    out.extend_from_slice(&dim_u32(buf.channels(), "channels")?.to_le_bytes());
    push_f32s(&mut out, buf.data());
    Ok(out)
}

pub fn decode_buffer(bytes: &[u8]) -> Result<Raster<f32>> {
    let mut r = Reader::new(bytes, "SEGIMG1");
    r.magic(MAGIC)?;
    let h = r.u32("height")? as usize;
    let w = r.u32("width")? as usize;
    let c = r.u32("channels")? as usize;
    let count = h
        .checked_mul(w)
        .and_then(|n| n.checked_mul(c))
        .ok_or_else(|| Error::parse("SEGIMG1 header", "buffer size overflows"))?;
    let data = r.f32_payload(count, "payload")?;
    Raster::from_vec(w, h, c, data)
}

pub fn read_buffer(path: impl AsRef<Path>) -> Result<Raster<f32>> {
    decode_buffer(&super::read_bytes(path.as_ref())?)
}

pub fn write_buffer(path: impl AsRef<Path>, buf: &Raster<f32>) -> Result<()> {
    super::write_bytes(path.as_ref(), &encode_buffer(buf)?)
}
