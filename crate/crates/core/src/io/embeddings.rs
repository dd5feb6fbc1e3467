use std::path::Path;

use super::binary::{dim_u32, push_f32s, Reader};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SEGEMB1\0";

/// Row-major `rows × cols` f32 matrix as stored in a `SEGEMB1` blob.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f32>,
}

impl EmbeddingMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!("{rows}x{cols} matrix needs {} values", rows * cols)));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("embedding rows differ in length"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f32>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Bitwise equality, so NaN payloads compare equal to themselves.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data.iter().zip(&other.data).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

pub fn encode_embeddings(m: &EmbeddingMatrix) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(16 + m.data.len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&dim_u32(m.rows, "row count")?.to_le_bytes());
    out.extend_from_slice(&dim_u32(m.cols, "column count")?.to_le_bytes());
    push_f32s(&mut out, &m.data);
    Ok(out)
}

pub fn decode_embeddings(bytes: &[u8]) -> Result<EmbeddingMatrix> {
    let mut r = Reader::new(bytes, "SEGEMB1");
    r.magic(MAGIC)?;
    let rows = r.u32("N")? as usize;
    let cols = r.u32("D")? as usize;
    let data = r.f32_payload(rows * cols, "payload")?;
    Ok(EmbeddingMatrix { rows, cols, data })
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    decode_embeddings(&super::read_bytes(path.as_ref())?)
}

pub fn write_embeddings(path: impl AsRef<Path>, m: &EmbeddingMatrix) -> Result<()> {
    super::write_bytes(path.as_ref(), &encode_embeddings(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_by_four() {
        let mut bytes = MAGIC.to_vec();
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&4u32.to_le_bytes());
        for i in 0..8 {
            bytes.extend_from_slice(&(i as f32).to_le_bytes());
        }
        let m = decode_embeddings(&bytes).unwrap();
        assert_eq!((m.rows, m.cols), (2, 4));
        assert_eq!(m.row(1), &[4.0, 5.0, 6.0, 7.0]);
    }

    #[test]
    fn short_and_long_payloads_fail() {
        let m = EmbeddingMatrix::new(2, 4, vec![0.5; 8]).unwrap();
        let bytes = encode_embeddings(&m).unwrap();
        assert!(matches!(decode_embeddings(&bytes[..bytes.len() - 1]), Err(Error::Parse { .. })));
        let mut long = bytes.clone();
        long.push(0);
        assert!(decode_embeddings(&long).is_err());
        let mut bad = bytes;
        bad[0] = b'X';
        let err = decode_embeddings(&bad).unwrap_err().to_string();
        assert!(err.contains("magic"), "{err}");
        assert!(decode_embeddings(b"SEGEMB1\0\x01").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(rows in 0usize..6, cols in 1usize..9, bits in prop::collection::vec(any::<u32>(), 54)) {
            let data: Vec<f32> = bits.iter().cycle().take(rows * cols).map(|&b| f32::from_bits(b)).collect();
            let m = EmbeddingMatrix::new(rows, cols, data).unwrap();
            let back = decode_embeddings(&encode_embeddings(&m).unwrap()).unwrap();
            prop_assert!(back.bit_eq(&m));
        }
    }
}
