use std::path::Path;

use super::binary::{dim_u32, push_f32s, Reader};
use crate::bank::SemanticBank;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SEGBNK1\0";

pub fn encode_bank(bank: &SemanticBank) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(40 + bank.centroids().len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&dim_u32(bank.len(), "bank size")?.to_le_bytes());
    out.extend_from_slice(&dim_u32(bank.dim(), "bank dimension")?.to_le_bytes());
    out.extend_from_slice(&bank.seed.to_le_bytes());
    out.extend_from_slice(&bank.lambda.to_le_bytes());
    out.extend_from_slice(&bank.iterations.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    push_f32s(&mut out, bank.centroids());
    Ok(out)
}

pub fn decode_bank(bytes: &[u8]) -> Result<SemanticBank> {
    let mut r = Reader::new(bytes, "SEGBNK1");
    r.magic(MAGIC)?;
    let m = r.u32("M")? as usize;
    let dim = r.u32("D")? as usize;
    let seed = r.u64("seed")?;
    let lambda = r.f64("lambda")?;
    let iterations = r.u32("iterations")?;
    let reserved = r.u32("reserved")?;
    if reserved != 0 {
        return Err(Error::parse("SEGBNK1 reserved", format!("expected 0, found {reserved}")));
    }
    let data = r.f32_payload(m * dim, "centroids")?;
    SemanticBank::new(m, dim, data, seed, lambda, iterations).map_err(|e| Error::parse("SEGBNK1 centroids", e.to_string()))
}

pub fn read_bank(path: impl AsRef<Path>) -> Result<SemanticBank> {
    decode_bank(&super::read_bytes(path.as_ref())?)
}

pub fn write_bank(path: impl AsRef<Path>, bank: &SemanticBank) -> Result<()> {
    super::write_bytes(path.as_ref(), &encode_bank(bank)?)
}
