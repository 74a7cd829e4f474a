use super::schedule::DiffusionSchedule;
use super::simplex::Simplex2D;
use crate::imagecore::Image2D;
use crate::rng::{derive_seed, rng_from};
use crate::{math, Error, Result};
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Gaussian,
    Simplex,
}

/// A standardised (zero-mean, unit-variance) noise raster.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseField {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
    pub seed: u64,
    pub kind: NoiseKind,
}

/// How corruption noise is generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub kind: NoiseKind,
    pub octaves: usize,
    pub persistence: f64,
    /// Largest feature size in pixels; `None` uses the image width.
    pub base_scale: Option<f64>,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self { kind: NoiseKind::Simplex, octaves: 6, persistence: 0.8, base_scale: None }
    }
}

impl NoiseParams {
    pub fn gaussian() -> Self {
        Self { kind: NoiseKind::Gaussian, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == NoiseKind::Simplex {
            check_simplex(self.octaves, self.persistence, self.base_scale.unwrap_or(1.0))?;
        }
        Ok(())
    }
}

fn check_simplex(octaves: usize, persistence: f64, base_scale: f64) -> Result<()> {
    if octaves == 0 {
        return Err(Error::invalid("octaves must be at least 1"));
    }
    if !(persistence > 0.0 && persistence <= 1.0) {
        return Err(Error::invalid("persistence must lie in (0, 1]"));
    }
    if !(base_scale > 0.0 && base_scale.is_finite()) {
        return Err(Error::invalid("base scale must be positive"));
    }
    Ok(())
}

/// Shifts to zero mean and scales to unit population variance. Constant
/// fields are only centred.
fn standardize(values: &mut [f64]) {
    let mean = math::mean(values);
    for v in values.iter_mut() {
        *v -= mean;
    }
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    let var = math::mean(&sq);
    if var > 0.0 {
        let inv = 1.0 / math::sqrt(var);
        for v in values.iter_mut() {
            *v *= inv;
        }
    }
}

/// Unstandardised octave sum: `sum_o persistence^o * simplex(p / (base_scale / 2^o))`.
pub(crate) fn simplex_octaves(
    seed: u64,
    width: usize,
    height: usize,
    octaves: usize,
    persistence: f64,
    base_scale: f64,
) -> Vec<f64> {
    let noise = Simplex2D::new(seed);
    let mut rng = rng_from(derive_seed(seed, crate::rng::stream::NOISE, 0));
    let layers: Vec<(f64, f64, f64, f64)> = (0..octaves)
        .map(|o| {
            let freq = (1u64 << o.min(62)) as f64 / base_scale;
            let amp = math::powf(persistence, o as f64);
            (freq, amp, rng.random_range(0.0..256.0), rng.random_range(0.0..256.0))
        })
        .collect();
    let mut values = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            let mut acc = 0.0;
            for &(freq, amp, ox, oy) in &layers {
                acc += amp * noise.sample(c as f64 * freq + ox, r as f64 * freq + oy);
            }
            values.push(acc);
        }
    }
    values
}

/// Multi-octave simplex noise, standardised over the field.
pub fn simplex_field(
    seed: u64,
    width: usize,
    height: usize,
    octaves: usize,
    persistence: f64,
    base_scale: f64,
) -> Result<NoiseField> {
    check_simplex(octaves, persistence, base_scale)?;
    let mut values = simplex_octaves(seed, width, height, octaves, persistence, base_scale);
    standardize(&mut values);
    Ok(NoiseField { width, height, values, seed, kind: NoiseKind::Simplex })
}

/// I.i.d. standard normal noise, standardised over the field.
pub fn gaussian_field(seed: u64, width: usize, height: usize) -> NoiseField {
    let mut rng = rng_from(seed);
    let mut values: Vec<f64> = (0..width * height).map(|_| rng.sample(StandardNormal)).collect();
    standardize(&mut values);
    NoiseField { width, height, values, seed, kind: NoiseKind::Gaussian }
}

/// Field of the configured kind for an image of the given size.
pub fn noise_field(params: &NoiseParams, seed: u64, width: usize, height: usize) -> Result<NoiseField> {
    match params.kind {
        NoiseKind::Gaussian => Ok(gaussian_field(seed, width, height)),
        NoiseKind::Simplex => simplex_field(
            seed,
            width,
            height,
            params.octaves,
            params.persistence,
            params.base_scale.unwrap_or(width as f64),
        ),
    }
}

/// `x_t = sqrt(abar_t) * x0 + sqrt(1 - abar_t) * noise` on the foreground;
/// background pixels are copied from `x0`. Values are not clamped.
pub fn forward_noise(x0: &Image2D, t: usize, noise: &NoiseField, sched: &DiffusionSchedule) -> Result<Image2D> {
    let abar = sched.alpha_bar(t)?;
    crate::imagecore::check_shape(x0.width(), x0.height(), noise.width, noise.height)?;
    let (signal, spread) = (math::sqrt(abar), math::sqrt(1.0 - abar));
    let pixels = x0
        .pixels()
        .iter()
        .zip(&noise.values)
        .enumerate()
        .map(|(i, (&v, &n))| if x0.is_foreground(i) { signal * v + spread * n } else { v })
        .collect();
    x0.with_pixels(pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::linear_schedule;
    use crate::imagecore::BinaryMask;

    fn moments(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n)
    }

    #[test]
    fn fields_are_standardized() {
        let f = simplex_field(5, 32, 24, 6, 0.8, 32.0).unwrap();
        let (m, v) = moments(&f.values);
        assert!(m.abs() < 1e-9 && (v - 1.0).abs() < 1e-9);
        let g = gaussian_field(5, 32, 24);
        let (m, v) = moments(&g.values);
        assert!(m.abs() < 1e-9 && (v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn same_seed_same_bits() {
        let a = simplex_field(11, 20, 20, 3, 0.5, 10.0).unwrap();
        let b = simplex_field(11, 20, 20, 3, 0.5, 10.0).unwrap();
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn invalid_simplex_params() {
        assert!(simplex_field(0, 8, 8, 0, 0.5, 8.0).is_err());
        assert!(simplex_field(0, 8, 8, 2, 0.0, 8.0).is_err());
        assert!(simplex_field(0, 8, 8, 2, 1.5, 8.0).is_err());
        assert!(simplex_field(0, 8, 8, 2, 0.5, 0.0).is_err());
    }

    #[test]
    fn forward_noise_hand_value() {
        // abar = 0.64 on a one-step schedule: beta = 0.36.
        let sched = DiffusionSchedule::from_betas(alloc::vec![0.36]).unwrap();
        let x0 = Image2D::filled(1, 1, 0.5);
        let noise = NoiseField { width: 1, height: 1, values: alloc::vec![1.0], seed: 0, kind: NoiseKind::Gaussian };
        let xt = forward_noise(&x0, 1, &noise, &sched).unwrap();
        assert!((xt.pixels()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_noise_scales_signal_and_keeps_background() {
        let sched = linear_schedule(100, 1e-3, 0.02).unwrap();
        let mask = BinaryMask::from_fn(4, 4, |r, _| r < 2);
        let x0 = Image2D::filled(4, 4, 0.6).with_foreground(mask).unwrap().zero_background();
        let noise = NoiseField { width: 4, height: 4, values: alloc::vec![0.0; 16], seed: 0, kind: NoiseKind::Gaussian };
        let xt = forward_noise(&x0, 40, &noise, &sched).unwrap();
        let s = sched.alpha_bar(40).unwrap().sqrt();
        for (i, &v) in xt.pixels().iter().enumerate() {
            assert_eq!(v, if i < 8 { s * 0.6 } else { 0.0 });
        }
        assert!(matches!(forward_noise(&x0, 0, &noise, &sched), Err(Error::StepOutOfRange { .. })));
        assert!(matches!(forward_noise(&x0, 101, &noise, &sched), Err(Error::StepOutOfRange { .. })));
    }
}
