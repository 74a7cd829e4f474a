use super::{header_tokens, parse_dim, read_file, write_file, FormatError};
use anomap_core::BinaryMask;
use std::path::Path;

pub fn encode_pgm_mask(mask: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

pub fn decode_pgm_mask(bytes: &[u8]) -> Result<BinaryMask, FormatError> {
    if !bytes.starts_with(b"P5") {
        return Err(FormatError::BadMagic { expected: "P5" });
    }
    let (tokens, offset) = header_tokens(bytes, 4)?;
    if tokens[0] != "P5" {
        return Err(FormatError::BadMagic { expected: "P5" });
    }
    let (width, height) = (parse_dim(&tokens[1])?, parse_dim(&tokens[2])?);
    let maxval: u32 = tokens[3].parse().map_err(|_| FormatError::Header(format!("invalid maxval '{}'", tokens[3])))?;
    if maxval != 255 {
        return Err(FormatError::MaxVal(maxval));
    }
    let payload = &bytes[offset..];
    let expected = width * height;
    if payload.len() < expected {
        return Err(FormatError::Truncated { expected, found: payload.len() });
    }
    if payload.len() > expected {
        return Err(FormatError::Trailing(payload.len() - expected));
    }
    Ok(BinaryMask::new(width, height, payload.iter().map(|&b| b != 0).collect())?)
}

pub fn read_pgm_mask(path: &Path) -> Result<BinaryMask, FormatError> {
    decode_pgm_mask(&read_file(path)?)
}

pub fn write_pgm_mask(path: &Path, mask: &BinaryMask) -> Result<(), FormatError> {
    write_file(path, &encode_pgm_mask(mask))
}
