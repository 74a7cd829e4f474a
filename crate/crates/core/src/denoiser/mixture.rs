use super::{DenoiseContext, Denoiser};
use crate::imagecore::{gaussian_kernel, masked_convolve, BinaryMask, Image2D, Kernel1D};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// A desk-scale trainable denoiser: a per-step-bucket linear mixture of fixed
/// blur responses plus a bias,
/// `y = sum_k w[b(t)][k] * (kernel_k * x_t) + bias[b(t)]`, clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMixtureModel {
    sigmas: Vec<f64>,
    kernels: Vec<Kernel1D>,
    steps: usize,
    buckets: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl KernelMixtureModel {
    /// `sigmas` lists the kernel widths; `0.0` denotes the identity kernel.
    /// Weights start uniform at `1/K`, biases at zero.
    pub fn new(sigmas: &[f64], buckets: usize, steps: usize) -> Result<Self> {
        if sigmas.is_empty() || buckets == 0 || steps == 0 {
            return Err(Error::invalid("kernel mixture needs kernels, buckets and steps"));
        }
        let kernels = sigmas
            .iter()
            .map(|&s| if s == 0.0 { Ok(Kernel1D::identity()) } else { gaussian_kernel(s) })
            .collect::<Result<Vec<_>>>()?;
        let k = sigmas.len();
        Ok(Self {
            sigmas: sigmas.to_vec(),
            kernels,
            steps,
            buckets,
            weights: vec![1.0 / k as f64; buckets * k],
            biases: vec![0.0; buckets],
        })
    }

    /// Identity plus Gaussians of width 0.5, 1, 2 and 4; eight step buckets.
    pub fn standard(steps: usize) -> Result<Self> {
        Self::new(&[0.0, 0.5, 1.0, 2.0, 4.0], 8, steps)
    }

    pub fn kernel_count(&self) -> usize {
        self.kernels.len()
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn kernels(&self) -> &[Kernel1D] {
        &self.kernels
    }

    /// Row-major `buckets × kernels` weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    pub fn bucket(&self, t: usize) -> Result<usize> {
        if t == 0 || t > self.steps {
            return Err(Error::StepOutOfRange { t, steps: self.steps });
        }
        Ok(((t - 1) * self.buckets / self.steps).min(self.buckets - 1))
    }

    /// Blur responses of `x_t` for every kernel, restricted to its foreground.
    pub fn responses(&self, x_t: &Image2D) -> Vec<Vec<f64>> {
        let mask = x_t.foreground_or_full();
        self.kernels.iter().map(|k| masked_convolve(x_t.pixels(), &mask, k)).collect()
    }

    /// Affine prediction before clamping; zero off the foreground.
    pub fn combine(&self, responses: &[Vec<f64>], bucket: usize, mask: &BinaryMask) -> Vec<f64> {
        let k = self.kernels.len();
        let w = &self.weights[bucket * k..(bucket + 1) * k];
        let b = self.biases[bucket];
        (0..mask.bits().len())
            .map(|q| {
                if !mask.bits()[q] {
                    return 0.0;
                }
                let mut acc = b;
                for (wk, rk) in w.iter().zip(responses) {
                    acc += wk * rk[q];
                }
                acc
            })
            .collect()
    }

    pub fn predict_unclamped(&self, x_t: &Image2D, t: usize) -> Result<Vec<f64>> {
        let bucket = self.bucket(t)?;
        Ok(self.combine(&self.responses(x_t), bucket, &x_t.foreground_or_full()))
    }

    pub fn predict(&self, x_t: &Image2D, t: usize) -> Result<Image2D> {
        let raw = self.predict_unclamped(x_t, t)?;
        let mask = x_t.foreground_or_full();
        let pixels = raw
            .into_iter()
            .zip(mask.bits())
            .map(|(v, &m)| if m { v.clamp(0.0, 1.0) } else { 0.0 })
            .collect();
        x_t.with_pixels(pixels)
    }

    pub(crate) fn params_finite(&self) -> bool {
        self.weights.iter().chain(&self.biases).all(|v| v.is_finite())
    }
}

impl Denoiser for KernelMixtureModel {
    fn denoise(&self, noisy: &Image2D, t: usize, _ctx: &DenoiseContext<'_>) -> Result<Image2D> {
        self.predict(noisy, t)
    }
}
