//! On-disk raster formats.
//!
//! Images are F32R: an ASCII header `F32R <width> <height>\n` followed by
//! row-major little-endian `f32` values. Masks are binary PGM (P5, maxval
//! 255), where any nonzero byte is foreground.

mod f32r;
mod pgm;

pub use f32r::{decode_f32r, encode_f32r, read_f32r, write_f32r};
pub use pgm::{decode_pgm_mask, encode_pgm_mask, read_pgm_mask, write_pgm_mask};

use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("bad magic: expected {expected}")]
    BadMagic { expected: &'static str },
    #[error("malformed header: {0}")]
    Header(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{0} trailing bytes after payload")]
    Trailing(usize),
    #[error("unsupported maxval {0}; masks use 255")]
    MaxVal(u32),
    #[error(transparent)]
    Core(#[from] anomap_core::Error),
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, FormatError> {
    std::fs::read(path).map_err(|source| FormatError::Io { path: path.to_owned(), source })
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let io_err = |source| FormatError::Io { path: path.to_owned(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    std::fs::write(path, bytes).map_err(io_err)
}

/// Splits `count` whitespace-separated ASCII tokens off the front of `bytes`,
/// skipping `#` comments, and returns them with the offset just past the
/// single whitespace byte that ends the last token.
pub(crate) fn header_tokens(bytes: &[u8], count: usize) -> Result<(Vec<String>, usize), FormatError> {
    let mut tokens = Vec::with_capacity(count);
    let mut i = 0;
    while tokens.len() < count {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'#') {
            if bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(FormatError::Header(format!("expected {count} header fields, found {}", tokens.len())));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    if i >= bytes.len() {
        return Err(FormatError::Header("header is not terminated".into()));
    }
    Ok((tokens, i + 1))
}

pub(crate) fn parse_dim(token: &str) -> Result<usize, FormatError> {
    match token.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(FormatError::Header(format!("invalid dimension '{token}'"))),
    }
}
