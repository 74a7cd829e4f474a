//! Reconstructions produced outside this crate, e.g. by a deep model.

use crate::format::read_f32r;
use anomap_core::denoiser::{DenoiseContext, Denoiser};
use anomap_core::{Error, Image2D};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const MANIFEST: &str = "manifest.tsv";

/// A [`Denoiser`] that ignores its input and returns the stored
/// reconstruction of the sample being evaluated.
///
/// The manifest maps sample identifiers to F32R files, one
/// `<id>\t<relative path>` per line.
#[derive(Debug, Clone)]
pub struct ExternalReconstructor {
    entries: BTreeMap<String, PathBuf>,
}

impl ExternalReconstructor {
    pub fn open(dir: &Path) -> anyhow::Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let Some((id, rel)) = line.split_once('\t') else {
                anyhow::bail!("{} line {}: expected '<id>\\t<path>'", path.display(), n + 1);
            };
            if entries.insert(id.to_owned(), dir.join(rel.trim_end())).is_some() {
                anyhow::bail!("{} line {}: duplicate id '{id}'", path.display(), n + 1);
            }
        }
        Ok(Self { entries })
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (String, PathBuf)>) -> Self {
        Self { entries: entries.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Denoiser for ExternalReconstructor {
    fn denoise(&self, noisy: &Image2D, _t: usize, ctx: &DenoiseContext<'_>) -> anomap_core::Result<Image2D> {
        let id = ctx.sample_id.ok_or_else(|| Error::Model("external reconstructions need a sample id".into()))?;
        let path = self.entries.get(id).ok_or_else(|| Error::MissingReconstruction(id.to_owned()))?;
        let recon = read_f32r(path).map_err(|e| match e {
            crate::format::FormatError::Core(e) => e,
            other => Error::Model(format!("reconstruction for {id}: {other}")),
        })?;
        if (recon.width(), recon.height()) != (noisy.width(), noisy.height()) {
            return Err(Error::DimensionMismatch {
                expected_w: noisy.width(),
                expected_h: noisy.height(),
                got_w: recon.width(),
                got_h: recon.height(),
            });
        }
        Ok(recon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::write_f32r;

    #[test]
    fn passthrough_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let values: Vec<f64> = (0..16).map(|i| i as f64 / 16.0).collect();
        write_f32r(&dir.path().join("a.f32r"), 4, 4, &values).unwrap();
        write_f32r(&dir.path().join("small.f32r"), 2, 2, &values[..4]).unwrap();
        std::fs::write(dir.path().join(MANIFEST), "s1\ta.f32r\ns2\tsmall.f32r\n").unwrap();
        let model = ExternalReconstructor::open(dir.path()).unwrap();
        assert_eq!(model.len(), 2);
        let noisy = Image2D::filled(4, 4, 0.9);
        let ctx = |id| DenoiseContext { sample_id: Some(id), original: None };
        assert_eq!(model.denoise(&noisy, 1, &ctx("s1")).unwrap().pixels(), &values[..]);
        let err = model.denoise(&noisy, 1, &ctx("s17")).unwrap_err();
        assert_eq!(err.to_string(), "no reconstruction for s17");
        assert!(matches!(model.denoise(&noisy, 1, &ctx("s2")), Err(Error::DimensionMismatch { .. })));
    }
}
