//! Dataset directories.
//!
//! ```text
//! <dir>/dataset.tsv            id<TAB>split<TAB>profile, one line per sample
//! <dir>/<split>/<id>.f32r      image
//! <dir>/<split>/<id>.fg.pgm    brain mask
//! <dir>/<split>/<id>.gt.pgm    anomaly ground truth
//! ```

use crate::format::{read_f32r, read_pgm_mask, write_f32r, write_pgm_mask, FormatError};
use anomap_core::phantom::{LabeledSample, PhantomDataset, ProfileKind};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const MANIFEST: &str = "dataset.tsv";
const SPLITS: [&str; 3] = ["train", "val", "test"];

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{MANIFEST} line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("sample {id}: {source}")]
    Sample { id: String, source: anomap_core::Error },
    #[error("split '{0}' is empty")]
    EmptySplit(&'static str),
}

fn sample_paths(dir: &Path, split: &str, id: &str) -> [PathBuf; 3] {
    let base = dir.join(split);
    [base.join(format!("{id}.f32r")), base.join(format!("{id}.fg.pgm")), base.join(format!("{id}.gt.pgm"))]
}

/// Writes all splits and the manifest. Images are stored in single precision.
pub fn write_dataset(dir: &Path, data: &PhantomDataset) -> Result<(), DatasetError> {
    let mut manifest = String::new();
    for (split, samples) in SPLITS.iter().zip([&data.train, &data.val, &data.test]) {
        for s in samples {
            let [img, fg, gt] = sample_paths(dir, split, &s.id);
            write_f32r(&img, s.image.width(), s.image.height(), s.image.pixels())?;
            write_pgm_mask(&fg, &s.foreground)?;
            write_pgm_mask(&gt, &s.anomaly_gt)?;
            let _ = writeln!(manifest, "{}\t{split}\t{}", s.id, s.profile);
        }
    }
    crate::format::write_file(&dir.join(MANIFEST), manifest.as_bytes())?;
    Ok(())
}

fn load_sample(dir: &Path, split: &str, id: &str, profile: ProfileKind) -> Result<LabeledSample, DatasetError> {
    let [img, fg, gt] = sample_paths(dir, split, id);
    let foreground = read_pgm_mask(&fg)?;
    let image = read_f32r(&img)?;
    let wrap = |source| DatasetError::Sample { id: id.to_owned(), source };
    let sample = LabeledSample {
        id: id.to_owned(),
        image: image.with_foreground(foreground.clone()).map_err(wrap)?,
        foreground,
        anomaly_gt: read_pgm_mask(&gt)?,
        profile,
    };
    sample.validate().map_err(wrap)?;
    Ok(sample)
}

/// Reads a dataset written by [`write_dataset`] (or laid out the same way by hand).
pub fn read_dataset(dir: &Path) -> Result<PhantomDataset, DatasetError> {
    let path = dir.join(MANIFEST);
    let text = crate::format::read_file(&path)?;
    let text = String::from_utf8_lossy(&text);
    let mut splits: [Vec<LabeledSample>; 3] = Default::default();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| DatasetError::Manifest { line: n + 1, message };
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, split, profile] = fields[..] else {
            return Err(bad(format!("expected 3 tab-separated fields, found {}", fields.len())));
        };
        let slot = SPLITS.iter().position(|s| *s == split).ok_or_else(|| bad(format!("unknown split '{split}'")))?;
        let profile: ProfileKind = profile.parse().map_err(|e: anomap_core::Error| bad(e.to_string()))?;
        splits[slot].push(load_sample(dir, split, id, profile)?);
    }
    let [train, val, test] = splits;
    for (name, s) in SPLITS.iter().zip([&train, &val, &test]) {
        if s.is_empty() {
            return Err(DatasetError::EmptySplit(name));
        }
    }
    Ok(PhantomDataset { train, val, test })
}
