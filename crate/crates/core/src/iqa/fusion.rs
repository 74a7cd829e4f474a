use super::ssim::{ssim_loss, ssim_map, SsimParams};
use super::AnomalyMap;
use crate::imagecore::{BinaryMask, Image2D};
use crate::{math, Error, Result};
use alloc::vec::Vec;

/// Blend weight between the SSIM loss (`alpha`) and L1 (`1 - alpha`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionParams {
    pub alpha: f64,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self { alpha: 0.84 }
    }
}

impl FusionParams {
    pub fn new(alpha: f64) -> Result<Self> {
        let p = Self { alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid("fusion alpha must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Mean absolute difference over `mask`.
pub fn l1_loss(x: &Image2D, y: &Image2D, mask: &BinaryMask) -> Result<f64> {
    x.same_shape(y)?;
    mask.same_shape(x.width(), x.height())?;
    let diffs: Vec<f64> = x
        .pixels()
        .iter()
        .zip(y.pixels())
        .zip(mask.bits())
        .filter_map(|((a, b), &m)| m.then(|| (a - b).abs()))
        .collect();
    if diffs.is_empty() {
        return Err(Error::NoWindows);
    }
    Ok(math::mean(&diffs))
}

/// `alpha * ssim_loss + (1 - alpha) * l1_loss`.
pub fn fusion_loss(x: &Image2D, y: &Image2D, p: &SsimParams, f: &FusionParams, mask: &BinaryMask) -> Result<f64> {
    f.validate()?;
    let s = ssim_loss(x, y, p, mask)?;
    let l = l1_loss(x, y, mask)?;
    Ok(f.alpha * s + (1.0 - f.alpha) * l)
}

/// Per-pixel blend of the SSIM error `(1 - SSIM) / 2` and the absolute error.
pub fn fusion_anomaly_map(x: &Image2D, y: &Image2D, p: &SsimParams, f: &FusionParams) -> Result<AnomalyMap> {
    f.validate()?;
    let map = ssim_map(x, y, p)?;
    let scores = map
        .values
        .iter()
        .zip(x.pixels().iter().zip(y.pixels()))
        .map(|(&s, (a, b))| {
            let ssim_err = ((1.0 - s) / 2.0).max(0.0);
            f.alpha * ssim_err + (1.0 - f.alpha) * (a - b).abs()
        })
        .collect();
    AnomalyMap::new(x.width(), x.height(), scores)
}
