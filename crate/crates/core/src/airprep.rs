//! Average intensity ratio (AIR) and the intensity-flip pre-processing.
//!
//! AIR compares the mean intensity of anomalous and normal foreground. When
//! normal tissue is brighter than mid-grey, reflecting the foreground with
//! `1 - x` never decreases AIR (and strictly increases it whenever lesions are
//! brighter still), which makes lesions stand out more to luminance terms.

use crate::phantom::LabeledSample;
use crate::{Error, Image2D, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetStats {
    pub mu_n: f64,
    pub mu_a: f64,
    pub n_pixels_normal: usize,
    pub n_pixels_anomalous: usize,
}

impl DatasetStats {
    /// Builds stats from known means, e.g. for analytic checks.
    pub fn from_means(mu_n: f64, mu_a: f64) -> Result<Self> {
        let stats = Self { mu_n, mu_a, n_pixels_normal: 1, n_pixels_anomalous: 1 };
        stats.validate()?;
        Ok(stats)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.mu_n) || !unit(self.mu_a) {
            return Err(Error::invalid("dataset means must lie in [0, 1]"));
        }
        if self.n_pixels_anomalous == 0 {
            return Err(Error::NoAnomalousPixels);
        }
        if self.n_pixels_normal == 0 {
            return Err(Error::NoNormalPixels);
        }
        Ok(())
    }
}

/// Whether the foreground is reflected (`x -> 1 - x`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessDecision {
    pub flip: bool,
    pub source_stats: DatasetStats,
}

impl PreprocessDecision {
    /// The no-op decision, for pipelines that skip pre-processing.
    pub fn identity(source_stats: DatasetStats) -> Self {
        Self { flip: false, source_stats }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirReport {
    pub mu_n: f64,
    pub mu_a: f64,
    pub air_before: f64,
    pub air_after: f64,
    pub flip: bool,
    pub holds: bool,
}

/// Pooled normal/anomalous foreground means over labelled samples.
///
/// Sums are accumulated per sample, then combined in sample order.
pub fn dataset_stats(samples: &[LabeledSample]) -> Result<DatasetStats> {
    let (mut sum_n, mut sum_a, mut n_n, mut n_a) = (0.0, 0.0, 0usize, 0usize);
    for s in samples {
        s.validate()?;
        let (mut ps_n, mut ps_a) = (0.0, 0.0);
        for ((&v, &fg), &gt) in s.image.pixels().iter().zip(s.foreground.bits()).zip(s.anomaly_gt.bits()) {
            if gt {
                ps_a += v;
                n_a += 1;
            } else if fg {
                ps_n += v;
                n_n += 1;
            }
        }
        sum_n += ps_n;
        sum_a += ps_a;
    }
    if n_a == 0 {
        return Err(Error::NoAnomalousPixels);
    }
    if n_n == 0 {
        return Err(Error::NoNormalPixels);
    }
    let stats = DatasetStats {
        mu_n: sum_n / n_n as f64,
        mu_a: sum_a / n_a as f64,
        n_pixels_normal: n_n,
        n_pixels_anomalous: n_a,
    };
    stats.validate()?;
    Ok(stats)
}

fn air_of(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::AirUndefined);
    }
    Ok(a.max(b) / a.min(b))
}

/// `max(mu_a, mu_n) / min(mu_a, mu_n)`.
pub fn air(stats: &DatasetStats) -> Result<f64> {
    air_of(stats.mu_n, stats.mu_a)
}

/// Flip exactly when the normal mean exceeds 0.5; depends on nothing else.
pub fn decide(stats: &DatasetStats) -> PreprocessDecision {
    PreprocessDecision { flip: stats.mu_n > 0.5, source_stats: *stats }
}

/// Applies the decision to the foreground; background pixels are untouched.
pub fn apply(img: &Image2D, d: &PreprocessDecision) -> Result<Image2D> {
    if img.pixels().iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::NotNormalized);
    }
    if !d.flip {
        return Ok(img.clone());
    }
    let pixels = img
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, &v)| if img.is_foreground(i) { 1.0 - v } else { v })
        .collect();
    img.with_pixels(pixels)
}

/// [`apply`] to a labelled sample, keeping its masks and identifier.
pub fn apply_sample(sample: &LabeledSample, d: &PreprocessDecision) -> Result<LabeledSample> {
    let image = apply(&sample.image.clone().with_foreground(sample.foreground.clone())?, d)?;
    Ok(LabeledSample { image, ..sample.clone() })
}

/// Analytic AIR before and after the decided transform.
///
/// Requires `0 < mu_n < mu_a < 1`; outside that regime the argument that the
/// flip cannot hurt does not apply and an error is returned instead.
pub fn verify_air_monotone(stats: &DatasetStats) -> Result<AirReport> {
    let (mu_n, mu_a) = (stats.mu_n, stats.mu_a);
    if !(0.0 < mu_n && mu_n < mu_a && mu_a < 1.0) {
        return Err(Error::ProofPreconditions);
    }
    let flip = decide(stats).flip;
    let air_before = air_of(mu_n, mu_a)?;
    let air_after = if flip { air_of(1.0 - mu_n, 1.0 - mu_a)? } else { air_before };
    Ok(AirReport { mu_n, mu_a, air_before, air_after, flip, holds: air_after >= air_before - 1e-12 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BinaryMask;
    use alloc::string::String;

    fn two_level() -> LabeledSample {
        let fg = BinaryMask::from_fn(4, 4, |r, _| r > 0);
        let gt = BinaryMask::from_fn(4, 4, |r, _| r > 2);
        let image = Image2D::from_fn(4, 4, |r, _| match r {
            0 => 0.0,
            1 | 2 => 0.3,
            _ => 0.7,
        })
        .unwrap();
        LabeledSample {
            id: String::from("s"),
            image: image.with_foreground(fg.clone()).unwrap(),
            foreground: fg,
            anomaly_gt: gt,
            profile: crate::phantom::ProfileKind::FlairLike,
        }
    }

    #[test]
    fn two_level_stats() {
        let s = dataset_stats(&[two_level()]).unwrap();
        assert!((s.mu_n - 0.3).abs() < 1e-15 && (s.mu_a - 0.7).abs() < 1e-15);
        assert_eq!((s.n_pixels_normal, s.n_pixels_anomalous), (8, 4));
    }

    #[test]
    fn healthy_data_rejected() {
        let mut s = two_level();
        s.anomaly_gt = BinaryMask::empty(4, 4);
        assert_eq!(dataset_stats(&[s]).unwrap_err(), Error::NoAnomalousPixels);
        assert_eq!(dataset_stats(&[]).unwrap_err(), Error::NoAnomalousPixels);
    }

    #[test]
    fn air_examples() {
        let st = |n, a| DatasetStats::from_means(n, a).unwrap();
        assert_eq!(air(&st(0.4, 0.4)).unwrap(), 1.0);
        assert!((air(&st(0.6, 0.8)).unwrap() - 0.8 / 0.6).abs() < 1e-15);
        assert_eq!(air(&st(0.6, 0.8)).unwrap(), air(&st(0.8, 0.6)).unwrap());
        assert_eq!(air(&st(0.0, 0.8)).unwrap_err(), Error::AirUndefined);
    }

    #[test]
    fn decision_boundary() {
        let st = |n| DatasetStats::from_means(n, 0.9).unwrap();
        assert!(decide(&st(0.55)).flip);
        assert!(!decide(&st(0.35)).flip);
        assert!(!decide(&st(0.5)).flip);
    }

    #[test]
    fn apply_flips_foreground_only() {
        let s = two_level();
        let d = decide(&DatasetStats::from_means(0.6, 0.8).unwrap());
        let out = apply(&s.image, &d).unwrap();
        assert_eq!(out.get(0, 0), 0.0);
        assert!((out.get(1, 0) - 0.7).abs() < 1e-15);
        let back = apply(&out, &d).unwrap();
        assert!(back.pixels().iter().zip(s.image.pixels()).all(|(a, b)| (a - b).abs() < 1e-15));
        let keep = PreprocessDecision::identity(d.source_stats);
        assert_eq!(apply(&s.image, &keep).unwrap(), s.image);
        let bad = Image2D::filled(2, 2, 1.5);
        assert_eq!(apply(&bad, &d).unwrap_err(), Error::NotNormalized);
    }

    #[test]
    fn monotone_examples() {
        let r = verify_air_monotone(&DatasetStats::from_means(0.6, 0.8).unwrap()).unwrap();
        assert!(r.flip && r.holds);
        assert!((r.air_after - 2.0).abs() < 1e-12);
        let r = verify_air_monotone(&DatasetStats::from_means(0.3, 0.45).unwrap()).unwrap();
        assert!(!r.flip && r.holds && r.air_before == r.air_after);
        let err = verify_air_monotone(&DatasetStats::from_means(0.8, 0.6).unwrap()).unwrap_err();
        assert_eq!(err, Error::ProofPreconditions);
    }
}
