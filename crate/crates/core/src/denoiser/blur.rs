use super::{DenoiseContext, Denoiser};
use crate::imagecore::{gaussian_kernel, masked_convolve, Image2D, Kernel1D};
use crate::Result;

/// Gaussian smoothing over the foreground, independent of `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurDenoiser {
    sigma: f64,
    kernel: Kernel1D,
}

impl BlurDenoiser {
    pub fn new(sigma: f64) -> Result<Self> {
        Ok(Self { sigma, kernel: gaussian_kernel(sigma)? })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Denoiser for BlurDenoiser {
    fn denoise(&self, noisy: &Image2D, _t: usize, _ctx: &DenoiseContext<'_>) -> Result<Image2D> {
        let mask = noisy.foreground_or_full();
        noisy.with_pixels(masked_convolve(noisy.pixels(), &mask, &self.kernel))
    }
}
