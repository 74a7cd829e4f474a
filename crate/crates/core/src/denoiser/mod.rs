//! Reconstruction models.
//!
//! A [`Denoiser`] maps a corrupted image at step `t` to an estimate of the
//! clean image. Implementations must preserve dimensions, produce finite
//! output and keep the background at zero.

mod blur;
mod mixture;
mod train;

pub use blur::BlurDenoiser;
pub use mixture::KernelMixtureModel;
pub use train::{batch_gradient, mean_loss, prepare_samples, train, BatchGradient, TrainConfig, TrainOutcome, TrainingSample};

use crate::imagecore::Image2D;
use crate::{Error, Result};

/// Side information available to a model for one call.
#[derive(Debug, Clone, Copy, Default)]
pub struct DenoiseContext<'a> {
    /// Identifier of the sample being reconstructed, when known.
    pub sample_id: Option<&'a str>,
    /// The uncorrupted input. Only oracle models used in tests may read it.
    pub original: Option<&'a Image2D>,
}

pub trait Denoiser {
    fn denoise(&self, noisy: &Image2D, t: usize, ctx: &DenoiseContext<'_>) -> Result<Image2D>;
}

impl<D: Denoiser + ?Sized> Denoiser for &D {
    fn denoise(&self, noisy: &Image2D, t: usize, ctx: &DenoiseContext<'_>) -> Result<Image2D> {
        (**self).denoise(noisy, t, ctx)
    }
}

impl<D: Denoiser + ?Sized> Denoiser for alloc::boxed::Box<D> {
    fn denoise(&self, noisy: &Image2D, t: usize, ctx: &DenoiseContext<'_>) -> Result<Image2D> {
        (**self).denoise(noisy, t, ctx)
    }
}

/// Test oracle that returns the uncorrupted original: a perfect reconstruction.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityOracle;

impl Denoiser for IdentityOracle {
    fn denoise(&self, _noisy: &Image2D, _t: usize, ctx: &DenoiseContext<'_>) -> Result<Image2D> {
        ctx.original
            .cloned()
            .ok_or_else(|| Error::Model("identity oracle called without the original image".into()))
    }
}
