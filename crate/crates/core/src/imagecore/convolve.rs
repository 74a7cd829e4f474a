use super::{clamp_index, BinaryMask};
use crate::{math, Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Symmetric 1-D kernel with nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel1D {
    weights: Vec<f64>,
}

impl Kernel1D {
    pub fn identity() -> Self {
        Self { weights: vec![1.0] }
    }

    pub fn radius(&self) -> usize {
        self.weights.len() / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Sampled Gaussian truncated at `ceil(3 sigma)` and normalised to unit sum.
pub fn gaussian_kernel(sigma: f64) -> Result<Kernel1D> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("sigma must be positive"));
    }
    let radius = math::ceil(3.0 * sigma) as isize;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| math::exp(-((i * i) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(Kernel1D { weights: raw.into_iter().map(|v| v / total).collect() })
}

fn separable(values: &[f64], width: usize, height: usize, k: &Kernel1D) -> Vec<f64> {
    let r = k.radius() as isize;
    let wts = k.weights();
    let mut tmp = vec![0.0; values.len()];
    for row in 0..height {
        for col in 0..width {
            let mut acc = 0.0;
            for (j, &wt) in wts.iter().enumerate() {
                acc += wt * values[row * width + clamp_index(col as isize + j as isize - r, width)];
            }
            tmp[row * width + col] = acc;
        }
    }
    let mut out = vec![0.0; values.len()];
    for row in 0..height {
        for col in 0..width {
            let mut acc = 0.0;
            for (j, &wt) in wts.iter().enumerate() {
                acc += wt * tmp[clamp_index(row as isize + j as isize - r, height) * width + col];
            }
            out[row * width + col] = acc;
        }
    }
    out
}

/// Normalised convolution restricted to `mask`: only masked pixels
/// contribute, weights are renormalised per output pixel and the output is
/// zero off the mask. Image borders use replicate padding. Linear in
/// `values` for a fixed mask.
pub fn masked_convolve(values: &[f64], mask: &BinaryMask, kernel: &Kernel1D) -> Vec<f64> {
    let (w, h) = (mask.width(), mask.height());
    debug_assert_eq!(values.len(), w * h);
    if kernel.radius() == 0 {
        return values
            .iter()
            .zip(mask.bits())
            .map(|(&v, &b)| if b { v } else { 0.0 })
            .collect();
    }
    let weights: Vec<f64> = mask.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let masked: Vec<f64> = values.iter().zip(&weights).map(|(v, m)| v * m).collect();
    let num = separable(&masked, w, h, kernel);
    let den = separable(&weights, w, h, kernel);
    num.iter()
        .zip(&den)
        .zip(mask.bits())
        .map(|((&n, &d), &b)| if b && d > 0.0 { n / d } else { 0.0 })
        .collect()
}
