use super::KernelMixtureModel;
use crate::diffusion::{forward_noise, noise_field, DiffusionSchedule, NoiseParams};
use crate::imagecore::{BinaryMask, Image2D};
use crate::iqa::{fusion_loss_and_grad, FusionParams, SsimParams};
use crate::rng::{derive_seed, rng_from, stream};
use crate::{math, Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Corruption noise; steps are drawn uniformly from `[1, T]`.
    pub noise: NoiseParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 300, learning_rate: 0.05, batch_size: 8, seed: 0, noise: NoiseParams::default() }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be a nonnegative finite number"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        self.noise.validate()
    }
}

/// A healthy image with its (fixed) corruption and precomputed blur responses.
#[derive(Debug, Clone)]
pub struct TrainingSample {
    pub clean: Image2D,
    pub mask: BinaryMask,
    pub t: usize,
    pub bucket: usize,
    pub responses: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: KernelMixtureModel,
    /// Mean per-sample loss of each epoch, in sample order.
    pub loss_trace: Vec<f64>,
}

/// Corrupts every image once (uniform step, seeded noise) and caches the
/// model's blur responses to the corrupted input.
pub fn prepare_samples(
    model: &KernelMixtureModel,
    data: &[Image2D],
    sched: &DiffusionSchedule,
    cfg: &TrainConfig,
) -> Result<Vec<TrainingSample>> {
    let first = data.first().ok_or(Error::EmptyData)?;
    if model.steps() != sched.steps() {
        return Err(Error::invalid("model and schedule disagree on the number of steps"));
    }
    data.iter()
        .enumerate()
        .map(|(i, x0)| {
            first.same_shape(x0)?;
            let sample_seed = derive_seed(cfg.seed, stream::CORRUPTION, i as u64);
            let t = rng_from(sample_seed).random_range(1..=sched.steps());
            let field = noise_field(&cfg.noise, derive_seed(sample_seed, stream::NOISE, 0), x0.width(), x0.height())?;
            let noisy = forward_noise(x0, t, &field, sched)?;
            Ok(TrainingSample {
                clean: x0.clone(),
                mask: x0.foreground_or_full(),
                t,
                bucket: model.bucket(t)?,
                responses: model.responses(&noisy),
            })
        })
        .collect()
}

/// Summed loss and parameter gradients over a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchGradient {
    pub losses: Vec<f64>,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl BatchGradient {
    pub fn loss(&self) -> f64 {
        self.losses.iter().sum()
    }
}

/// Per-sample losses and the gradient of their sum with respect to every
/// weight and bias. The clamp passes gradients through inside `[0, 1]`
/// and blocks them outside.
pub fn batch_gradient(
    model: &KernelMixtureModel,
    batch: &[&TrainingSample],
    ssim: &SsimParams,
    fusion: &FusionParams,
) -> Result<BatchGradient> {
    let k = model.kernel_count();
    let mut out = BatchGradient {
        losses: Vec::with_capacity(batch.len()),
        weights: vec![0.0; model.weights().len()],
        biases: vec![0.0; model.biases().len()],
    };
    for s in batch {
        let raw = model.combine(&s.responses, s.bucket, &s.mask);
        let clamped: Vec<f64> = raw.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let pred = s.clean.with_pixels(clamped)?;
        let (loss, mut g) = fusion_loss_and_grad(&s.clean, &pred, ssim, fusion, &s.mask)?;
        for (q, gq) in g.iter_mut().enumerate() {
            if !s.mask.bits()[q] || !(0.0..=1.0).contains(&raw[q]) {
                *gq = 0.0;
            }
        }
        for (kk, resp) in s.responses.iter().enumerate() {
            let dot: f64 = g.iter().zip(resp).map(|(a, b)| a * b).sum();
            out.weights[s.bucket * k + kk] += dot;
        }
        out.biases[s.bucket] += math::pairwise_sum(&g);
        out.losses.push(loss);
    }
    Ok(out)
}

/// Mean fusion loss of `model` on freshly corrupted copies of `data`, for
/// held-out evaluation. Corruption follows `cfg` exactly as in training.
pub fn mean_loss(
    model: &KernelMixtureModel,
    data: &[Image2D],
    sched: &DiffusionSchedule,
    cfg: &TrainConfig,
    ssim: &SsimParams,
    fusion: &FusionParams,
) -> Result<f64> {
    let samples = prepare_samples(model, data, sched, cfg)?;
    let batch: Vec<&TrainingSample> = samples.iter().collect();
    Ok(math::mean(&batch_gradient(model, &batch, ssim, fusion)?.losses))
}

/// Minibatch gradient descent on the mean fusion loss between each clean
/// image and the model's reconstruction of its corrupted copy.
pub fn train(
    mut model: KernelMixtureModel,
    data: &[Image2D],
    sched: &DiffusionSchedule,
    cfg: &TrainConfig,
    ssim: &SsimParams,
    fusion: &FusionParams,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let samples = prepare_samples(&model, data, sched, cfg)?;
    let n = samples.len();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut per_sample = vec![0.0; n];
    let mut initial = None;
    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng_from(derive_seed(cfg.seed, stream::TRAIN, epoch as u64)));
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&TrainingSample> = chunk.iter().map(|&i| &samples[i]).collect();
            let g = batch_gradient(&model, &batch, ssim, fusion)?;
            for (&i, &l) in chunk.iter().zip(&g.losses) {
                per_sample[i] = l;
            }
            let step = cfg.learning_rate / chunk.len() as f64;
            if step != 0.0 {
                for (w, dw) in model.weights_mut().iter_mut().zip(&g.weights) {
                    *w -= step * dw;
                }
                for (b, db) in model.biases_mut().iter_mut().zip(&g.biases) {
                    *b -= step * db;
                }
            }
        }
        let epoch_loss = math::mean(&per_sample);
        let start = *initial.get_or_insert(epoch_loss);
        log::debug!("epoch {epoch}: loss {epoch_loss:.6}");
        if !model.params_finite() || !epoch_loss.is_finite() || epoch_loss > 10.0 * start {
            return Err(Error::Diverged { epoch, loss: epoch_loss, initial: start });
        }
        loss_trace.push(epoch_loss);
    }
    Ok(TrainOutcome { model, loss_trace })
}
