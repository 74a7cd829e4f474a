use super::{header_tokens, parse_dim, read_file, write_file, FormatError};
use anomap_core::Image2D;
use std::path::Path;

const MAGIC: &str = "F32R";

/// Serializes pixel values as `f32`; values are rounded to single precision.
pub fn encode_f32r(width: usize, height: usize, values: &[f64]) -> Vec<u8> {
    debug_assert_eq!(values.len(), width * height);
    let mut out = format!("{MAGIC} {width} {height}\n").into_bytes();
    out.reserve(values.len() * 4);
    for &v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_f32r(bytes: &[u8]) -> Result<Image2D, FormatError> {
    if !bytes.starts_with(MAGIC.as_bytes()) {
        return Err(FormatError::BadMagic { expected: MAGIC });
    }
    let (tokens, offset) = header_tokens(bytes, 3)?;
    if tokens[0] != MAGIC {
        return Err(FormatError::BadMagic { expected: MAGIC });
    }
    let (width, height) = (parse_dim(&tokens[1])?, parse_dim(&tokens[2])?);
    let payload = &bytes[offset..];
    let expected = width * height * 4;
    if payload.len() < expected {
        return Err(FormatError::Truncated { expected, found: payload.len() });
    }
    if payload.len() > expected {
        return Err(FormatError::Trailing(payload.len() - expected));
    }
    let pixels = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Ok(Image2D::new(width, height, pixels)?)
}

pub fn read_f32r(path: &Path) -> Result<Image2D, FormatError> {
    decode_f32r(&read_file(path)?)
}

pub fn write_f32r(path: &Path, width: usize, height: usize, values: &[f64]) -> Result<(), FormatError> {
    write_file(path, &encode_f32r(width, height, values))
}
