//! Little-endian cursor shared by the binary formats.

use crate::error::{Error, Result};

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    format: &'static str,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8], format: &'static str) -> Self {
        Self { bytes, pos: 0, format }
    }

    pub fn take(&mut self, n: usize, element: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::parse(
                format!("{} {element}", self.format),
                format!("truncated: need {n} bytes at offset {}, file has {}", self.pos, self.bytes.len()),
            )
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub fn magic(&mut self, magic: &[u8; 8]) -> Result<()> {
        let got = self.take(8, "magic")?;
        if got != magic {
            return Err(Error::parse(
                format!("{} magic", self.format),
                format!("expected {:?}, found {:?}", String::from_utf8_lossy(magic), String::from_utf8_lossy(got)),
            ));
        }
        Ok(())
    }

    pub fn u32(&mut self, element: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, element)?.try_into().unwrap()))
    }

    pub fn u64(&mut self, element: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, element)?.try_into().unwrap()))
    }

    pub fn f64(&mut self, element: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, element)?.try_into().unwrap()))
    }

    /// Reads exactly `count` f32 values and requires the input to end there.
    pub fn f32_payload(&mut self, count: usize, element: &str) -> Result<Vec<f32>> {
        let len = count.checked_mul(4).ok_or_else(|| Error::parse(format!("{} header", self.format), "size overflow"))?;
        let remaining = self.bytes.len() - self.pos;
        if remaining != len {
            return Err(Error::parse(
                format!("{} {element}", self.format),
                format!("header declares {len} payload bytes, found {remaining}"),
            ));
        }
        let raw = self.take(len, element)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub(crate) fn push_f32s(out: &mut Vec<u8>, values: &[f32]) {
    out.reserve(values.len() * 4);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub(crate) fn dim_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::invalid(format!("{what} {v} does not fit in 32 bits")))
}
