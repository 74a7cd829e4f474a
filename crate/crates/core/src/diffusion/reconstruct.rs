use super::noise::{forward_noise, noise_field, NoiseParams};
use super::schedule::DiffusionSchedule;
use crate::denoiser::{DenoiseContext, Denoiser};
use crate::imagecore::{check_shape, Image2D};
use crate::rng::{derive_seed, stream};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Patch geometry for patch-conditioned reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchSpec {
    pub patch_h: usize,
    pub patch_w: usize,
    pub stride_h: usize,
    pub stride_w: usize,
}

impl PatchSpec {
    /// Half-size patches at quarter-size strides.
    pub fn default_for(width: usize, height: usize) -> Self {
        Self {
            patch_h: (height / 2).max(1),
            patch_w: (width / 2).max(1),
            stride_h: (height / 4).max(1),
            stride_w: (width / 4).max(1),
        }
    }

    /// A single patch covering the whole image.
    pub fn whole(width: usize, height: usize) -> Self {
        Self { patch_h: height, patch_w: width, stride_h: 1, stride_w: 1 }
    }

    /// Top-left corners in row-major placement order.
    pub fn placements(&self, width: usize, height: usize) -> Result<Vec<(usize, usize)>> {
        if self.patch_h == 0 || self.patch_w == 0 || self.stride_h == 0 || self.stride_w == 0 {
            return Err(Error::invalid("patch sizes and strides must be at least 1"));
        }
        if self.patch_h > height || self.patch_w > width {
            return Err(Error::invalid("patch larger than image"));
        }
        let rows: Vec<usize> = (0..=height - self.patch_h).step_by(self.stride_h).collect();
        let cols: Vec<usize> = (0..=width - self.patch_w).step_by(self.stride_w).collect();
        let covers = |starts: &[usize], patch: usize, len: usize| {
            starts.last().is_some_and(|&s| s + patch == len)
                && starts.windows(2).all(|w| w[1] <= w[0] + patch)
        };
        if !covers(&rows, self.patch_h, height) || !covers(&cols, self.patch_w, width) {
            return Err(Error::PatchCoverage);
        }
        Ok(rows.iter().flat_map(|&r| cols.iter().map(move |&c| (r, c))).collect())
    }

    /// Number of placements covering each pixel.
    pub fn coverage(&self, width: usize, height: usize) -> Result<Vec<u32>> {
        let mut counts = vec![0u32; width * height];
        for (r0, c0) in self.placements(width, height)? {
            for r in r0..r0 + self.patch_h {
                for c in c0..c0 + self.patch_w {
                    counts[r * width + c] += 1;
                }
            }
        }
        Ok(counts)
    }
}

/// Corruption applied before reconstruction.
#[derive(Debug, Clone, Copy)]
pub struct Corruption<'a> {
    pub schedule: &'a DiffusionSchedule,
    pub t: usize,
    pub noise: NoiseParams,
    pub seed: u64,
}

fn run_model<D: Denoiser + ?Sized>(model: &D, noisy: &Image2D, t: usize, ctx: &DenoiseContext<'_>) -> Result<Image2D> {
    let out = model.denoise(noisy, t, ctx)?;
    check_shape(noisy.width(), noisy.height(), out.width(), out.height())?;
    Ok(out)
}

/// Corrupts the whole image once at `corruption.t` and returns the model's
/// clean-image estimate.
pub fn reconstruct_full<D: Denoiser + ?Sized>(
    model: &D,
    x: &Image2D,
    corruption: &Corruption<'_>,
    sample_id: Option<&str>,
) -> Result<Image2D> {
    corruption.schedule.check_step(corruption.t)?;
    let seed = derive_seed(corruption.seed, stream::NOISE, 0);
    let field = noise_field(&corruption.noise, seed, x.width(), x.height())?;
    let noisy = forward_noise(x, corruption.t, &field, corruption.schedule)?;
    let ctx = DenoiseContext { sample_id, original: Some(x) };
    run_model(model, &noisy, corruption.t, &ctx)
}

/// Patch-conditioned reconstruction: each placement corrupts only its patch,
/// keeps the model prediction inside it, and overlapping predictions are
/// averaged with uniform weights in placement order.
pub fn reconstruct_patched<D: Denoiser + ?Sized>(
    model: &D,
    x: &Image2D,
    corruption: &Corruption<'_>,
    spec: &PatchSpec,
    sample_id: Option<&str>,
) -> Result<Image2D> {
    corruption.schedule.check_step(corruption.t)?;
    let (w, h) = (x.width(), x.height());
    let placements = spec.placements(w, h)?;
    let ctx = DenoiseContext { sample_id, original: Some(x) };
    let mut merged = vec![0.0; x.len()];
    let mut counts = vec![0u32; x.len()];
    for (idx, &(r0, c0)) in placements.iter().enumerate() {
        let seed = derive_seed(corruption.seed, stream::NOISE, idx as u64);
        let field = noise_field(&corruption.noise, seed, w, h)?;
        let noised = forward_noise(x, corruption.t, &field, corruption.schedule)?;
        let inside = |i: usize| {
            let (r, c) = (i / w, i % w);
            r >= r0 && r < r0 + spec.patch_h && c >= c0 && c < c0 + spec.patch_w
        };
        let input: Vec<f64> = (0..x.len())
            .map(|i| if inside(i) { noised.pixels()[i] } else { x.pixels()[i] })
            .collect();
        let input = x.with_pixels(input)?;
        let pred = run_model(model, &input, corruption.t, &ctx)?;
        for r in r0..r0 + spec.patch_h {
            for c in c0..c0 + spec.patch_w {
                let i = r * w + c;
                counts[i] += 1;
                // Running mean: exact when all contributions agree.
                merged[i] += (pred.pixels()[i] - merged[i]) / counts[i] as f64;
            }
        }
    }
    x.with_pixels(merged)
}
