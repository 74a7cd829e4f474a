//! Image-quality measures used both as training losses and as anomaly scores.
//!
//! SSIM is evaluated on uniform `W`×`W` windows around every pixel. The
//! fusion loss blends the SSIM loss with the mean absolute error:
//! `alpha * (1 - mean SSIM) / 2 + (1 - alpha) * L1`.

mod fusion;
mod grad;
mod ssim;

pub use fusion::{fusion_anomaly_map, fusion_loss, l1_loss, FusionParams};
pub use grad::{fusion_loss_and_grad, fusion_loss_grad};
pub use ssim::{ssim_index, ssim_loss, ssim_map, SsimMap, SsimParams};

use crate::imagecore::BinaryMask;
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Per-pixel nonnegative anomaly scores.
#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyMap {
    width: usize,
    height: usize,
    scores: Vec<f64>,
}

impl AnomalyMap {
    pub fn new(width: usize, height: usize, scores: Vec<f64>) -> Result<Self> {
        if scores.len() != width * height {
            return Err(Error::invalid("score count does not match dimensions"));
        }
        if scores.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::invalid("anomaly scores must be finite and nonnegative"));
        }
        Ok(Self { width, height, scores })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, scores: vec![0.0; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.scores[row * self.width + col]
    }

    pub fn max(&self) -> f64 {
        self.scores.iter().copied().fold(0.0, f64::max)
    }

    /// Zeroes every score outside `mask`.
    pub fn masked(mut self, mask: &BinaryMask) -> Result<Self> {
        mask.same_shape(self.width, self.height)?;
        for (s, &b) in self.scores.iter_mut().zip(mask.bits()) {
            if !b {
                *s = 0.0;
            }
        }
        Ok(self)
    }

    /// Pixels scoring at or above `threshold`.
    pub fn threshold(&self, threshold: f64) -> BinaryMask {
        let bits = self.scores.iter().map(|&s| s >= threshold).collect();
        BinaryMask::new(self.width, self.height, bits).expect("same dimensions")
    }
}
