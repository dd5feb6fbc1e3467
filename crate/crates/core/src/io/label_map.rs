use std::io::Cursor;
use std::path::Path;

use image::{ImageBuffer, ImageFormat, Luma};

use crate::error::{Error, Result};
use crate::model::Raster;

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Decodes a 16-bit grayscale PNG or a `P5` PGM with maxval 65535.
pub fn decode_label_map(bytes: &[u8]) -> Result<Raster<u32>> {
    if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else {
        Err(Error::parse("label map", "neither PNG nor binary PGM"))
    }
}

fn decode_png(bytes: &[u8]) -> Result<Raster<u32>> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::parse("label map PNG", e.to_string()))?;
    match img {
        image::DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            Raster::from_vec(w as usize, h as usize, 1, buf.into_raw().into_iter().map(u32::from).collect())
        }
        other => Err(Error::parse(
            "label map PNG",
            format!("unsupported color type {:?}; expected 16-bit grayscale", other.color()),
        )),
    }
}

fn pgm_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::parse("label map PGM header", "unexpected end of header"));
    }
    Ok(&bytes[start..*pos])
}

fn pgm_number(bytes: &[u8], pos: &mut usize, field: &str) -> Result<usize> {
    let tok = pgm_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::parse(format!("label map PGM {field}"), format!("not a number: {:?}", String::from_utf8_lossy(tok))))
}

fn decode_pgm(bytes: &[u8]) -> Result<Raster<u32>> {
    let mut pos = 0;
    pgm_token(bytes, &mut pos)?;
    let w = pgm_number(bytes, &mut pos, "width")?;
    let h = pgm_number(bytes, &mut pos, "height")?;
    let maxval = pgm_number(bytes, &mut pos, "maxval")?;
    if maxval != 65535 {
        return Err(Error::parse("label map PGM maxval", format!("unsupported bit depth: maxval {maxval}, expected 65535")));
    }
    // single whitespace byte separates header and raster
    pos += 1;
    let need = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(2))
        .ok_or_else(|| Error::parse("label map PGM header", "image size overflows"))?;
    let payload = bytes.get(pos..).unwrap_or_default();
    if payload.len() != need {
        return Err(Error::parse("label map PGM raster", format!("expected {need} bytes, found {}", payload.len())));
    }
    let values = payload.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as u32).collect();
    Raster::from_vec(w, h, 1, values)
}

fn to_u16(map: &Raster<u32>) -> Result<Vec<u16>> {
    if map.channels() != 1 {
        return Err(Error::invalid("label maps have one channel"));
    }
    map.data()
        .iter()
        .map(|&v| u16::try_from(v).map_err(|_| Error::invalid(format!("label {v} does not fit in 16 bits"))))
        .collect()
}

pub fn encode_label_map_png(map: &Raster<u32>) -> Result<Vec<u8>> {
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(map.width() as u32, map.height() as u32, to_u16(map)?)
        .ok_or_else(|| Error::invalid("label map size mismatch"))?;
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn encode_label_map_pgm(map: &Raster<u32>) -> Result<Vec<u8>> {
    let values = to_u16(map)?;
    let mut out = format!("P5\n{} {}\n65535\n", map.width(), map.height()).into_bytes();
    for v in values {
        out.extend_from_slice(&v.to_be_bytes());
    }
    Ok(out)
}

pub fn read_label_map(path: impl AsRef<Path>) -> Result<Raster<u32>> {
    decode_label_map(&super::read_bytes(path.as_ref())?)
}

pub fn write_label_map_png(path: impl AsRef<Path>, map: &Raster<u32>) -> Result<()> {
    super::write_bytes(path.as_ref(), &encode_label_map_png(map)?)
}

pub fn write_label_map_pgm(path: impl AsRef<Path>, map: &Raster<u32>) -> Result<()> {
    super::write_bytes(path.as_ref(), &encode_label_map_pgm(map)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checker() -> Raster<u32> {
        Raster::from_vec(5, 3, 1, (0..15).map(|i| (i % 2) as u32).collect()).unwrap()
    }

    #[test]
    fn zero_and_checkerboard() {
        let zero = Raster::filled(4, 4, 1, 0u32);
        assert_eq!(decode_label_map(&encode_label_map_png(&zero).unwrap()).unwrap(), zero);
        for bytes in [encode_label_map_png(&checker()).unwrap(), encode_label_map_pgm(&checker()).unwrap()] {
            assert_eq!(decode_label_map(&bytes).unwrap(), checker());
        }
    }

    #[test]
    fn wide_ids_survive() {
        let map = Raster::from_vec(2, 1, 1, vec![300, 65535]).unwrap();
        assert_eq!(decode_label_map(&encode_label_map_png(&map).unwrap()).unwrap(), map);
        assert_eq!(decode_label_map(&encode_label_map_pgm(&map).unwrap()).unwrap(), map);
        assert!(encode_label_map_png(&Raster::from_vec(1, 1, 1, vec![70000]).unwrap()).is_err());
    }

    #[test]
    fn rejects_other_depths() {
        let gray8: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_raw(2, 2, vec![0, 1, 2, 3]).unwrap();
        let mut png = Cursor::new(Vec::new());
        gray8.write_to(&mut png, ImageFormat::Png).unwrap();
        let err = decode_label_map(png.get_ref()).unwrap_err().to_string();
        assert!(err.contains("16-bit"), "{err}");
        assert!(decode_label_map(b"P5\n2 2\n255\n\x00\x01\x02\x03").is_err());
        assert!(decode_label_map(b"P5\n2 2\n65535\n\x00\x01").is_err());
        assert!(decode_label_map(b"GIF89a").is_err());
    }

    #[test]
    fn pgm_header_comments() {
        let map = decode_label_map(b"P5 # a comment\n1 1\n# another\n65535\n\x01\x2c").unwrap();
        assert_eq!(map.data(), &[300]);
    }
}
