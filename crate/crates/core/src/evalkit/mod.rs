//! Inference post-processing, metrics and fold evaluation.
//!
//! Scoring follows reconstruct → fused anomaly map → median filter → zero
//! outside the eroded brain mask. A threshold is chosen on unhealthy
//! validation data only and then applied to the test split.

mod metrics;

pub use metrics::{auprc, dice, dice_curve, greedy_threshold, predict, uniform_grid, Confusion, MeanStd};

use crate::denoiser::Denoiser;
use crate::diffusion::{reconstruct_patched, Corruption, DiffusionSchedule, NoiseParams, PatchSpec};
use crate::imagecore::{erode, median_filter};
use crate::iqa::{fusion_anomaly_map, AnomalyMap, FusionParams, SsimParams};
use crate::phantom::LabeledSample;
use crate::rng::{derive_seed, stream};
use crate::{BinaryMask, Error, Image2D, Result};
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub t_test: usize,
    pub ssim: SsimParams,
    pub fusion: FusionParams,
    pub noise: NoiseParams,
    /// Patch layout; `None` uses [`PatchSpec::default_for`] the image size.
    pub patch: Option<PatchSpec>,
    pub median_k: usize,
    pub erosion_iters: usize,
    /// Number of evenly spaced thresholds between 0 and the largest validation score.
    pub grid_points: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            t_test: 750,
            ssim: SsimParams::default(),
            fusion: FusionParams::default(),
            noise: NoiseParams::default(),
            patch: None,
            median_k: 5,
            erosion_iters: 3,
            grid_points: 200,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        self.ssim.validate()?;
        self.fusion.validate()?;
        self.noise.validate()?;
        if self.median_k % 2 == 0 {
            return Err(Error::EvenKernel);
        }
        if self.grid_points == 0 {
            return Err(Error::invalid("threshold grid needs at least one point"));
        }
        Ok(())
    }
}

/// Post-processes a raw anomaly map: median filter, then zero outside the eroded mask.
pub fn postprocess(raw: &AnomalyMap, foreground: &BinaryMask, cfg: &EvalConfig) -> Result<AnomalyMap> {
    median_filter(raw, cfg.median_k)?.masked(&erode(foreground, cfg.erosion_iters))
}

/// Anomaly map of one sample against a reconstruction that was computed elsewhere.
pub fn score_reconstruction(sample: &LabeledSample, recon: &Image2D, cfg: &EvalConfig) -> Result<AnomalyMap> {
    let raw = fusion_anomaly_map(&sample.image, recon, &cfg.ssim, &cfg.fusion)?;
    postprocess(&raw, &sample.foreground, cfg)
}

/// Reconstructs `sample` with `model` at `cfg.t_test` and returns its post-processed anomaly map.
pub fn score_sample<D: Denoiser + ?Sized>(
    model: &D,
    sample: &LabeledSample,
    cfg: &EvalConfig,
    sched: &DiffusionSchedule,
    seed: u64,
) -> Result<AnomalyMap> {
    cfg.validate()?;
    sample.validate()?;
    let x = sample.image.clone().with_foreground(sample.foreground.clone())?;
    let spec = cfg.patch.unwrap_or_else(|| PatchSpec::default_for(x.width(), x.height()));
    let corruption = Corruption { schedule: sched, t: cfg.t_test, noise: cfg.noise, seed };
    let recon = reconstruct_patched(model, &x, &corruption, &spec, Some(&sample.id))?;
    score_reconstruction(sample, &recon, cfg)
}

/// A sample's anomaly map with the masks needed to evaluate it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSample {
    pub id: String,
    pub map: AnomalyMap,
    pub gt: BinaryMask,
    /// Pixels that take part in Dice and AUPRC (the brain foreground).
    pub region: BinaryMask,
}

impl ScoredSample {
    pub fn new(sample: &LabeledSample, map: AnomalyMap) -> Self {
        Self { id: sample.id.clone(), map, gt: sample.anomaly_gt.clone(), region: sample.foreground.clone() }
    }
}

/// Per-sample outcome at the fold threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub id: String,
    pub dice: f64,
    pub counts: Confusion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    /// Pooled test Dice at the validation threshold.
    pub dice: f64,
    pub auprc: f64,
    pub threshold: f64,
    pub per_sample: Vec<SampleResult>,
}

impl FoldResult {
    /// Mean of the per-sample Dice scores (pooled Dice is the headline number).
    pub fn mean_sample_dice(&self) -> f64 {
        let d: Vec<f64> = self.per_sample.iter().map(|s| s.dice).collect();
        crate::math::mean(&d)
    }
}

type Columns = (Vec<AnomalyMap>, Vec<BinaryMask>, Vec<BinaryMask>);

fn columns(samples: &[ScoredSample]) -> Columns {
    (
        samples.iter().map(|s| s.map.clone()).collect(),
        samples.iter().map(|s| s.gt.clone()).collect(),
        samples.iter().map(|s| s.region.clone()).collect(),
    )
}

/// Fails when any identifier occurs in both splits.
pub fn check_disjoint<'a>(
    val: impl IntoIterator<Item = &'a str>,
    test: impl IntoIterator<Item = &'a str>,
) -> Result<()> {
    let ids: BTreeSet<&str> = val.into_iter().collect();
    if test.into_iter().any(|id| ids.contains(id)) {
        return Err(Error::Leakage);
    }
    Ok(())
}

/// Threshold selection on `val` and evaluation on `test`, from precomputed maps.
///
/// Performs no leakage check; [`evaluate_fold`] does.
pub fn evaluate_scored(val: &[ScoredSample], test: &[ScoredSample], grid_points: usize) -> Result<FoldResult> {
    let (vm, vg, vr) = columns(val);
    let max = vm.iter().map(AnomalyMap::max).fold(0.0, f64::max);
    let grid = uniform_grid(max, grid_points)?;
    let threshold = greedy_threshold(&vm, &vg, &vr, &grid)?;
    let (tm, tg, tr) = columns(test);
    if tm.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut pooled = Confusion::default();
    let mut per_sample = Vec::with_capacity(test.len());
    for s in test {
        let counts = Confusion::of(&predict(&s.map, &s.region, threshold)?, &s.gt)?;
        pooled = pooled.merge(counts);
        per_sample.push(SampleResult { id: s.id.clone(), dice: counts.dice(), counts });
    }
    Ok(FoldResult { dice: pooled.dice(), auprc: auprc(&tm, &tg, &tr)?, threshold, per_sample })
}

/// Which evaluation split a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Validation,
    Test,
}

/// Corruption seed of sample `index` of `split`, so that samples can be scored
/// in any order (or concurrently) with identical results.
pub fn scoring_seed(seed: u64, split: Split, index: usize) -> u64 {
    let split_seed = derive_seed(seed, stream::SCORE, split as u64);
    derive_seed(split_seed, stream::NOISE, index as u64)
}

/// Scores every sample of a split in order.
pub fn score_all<D: Denoiser + ?Sized>(
    model: &D,
    samples: &[LabeledSample],
    split: Split,
    cfg: &EvalConfig,
    sched: &DiffusionSchedule,
    seed: u64,
) -> Result<Vec<ScoredSample>> {
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| Ok(ScoredSample::new(s, score_sample(model, s, cfg, sched, scoring_seed(seed, split, i))?)))
        .collect()
}

/// Validation-driven threshold search followed by test evaluation.
pub fn evaluate_fold<D: Denoiser + ?Sized>(
    model: &D,
    val: &[LabeledSample],
    test: &[LabeledSample],
    cfg: &EvalConfig,
    sched: &DiffusionSchedule,
    seed: u64,
) -> Result<FoldResult> {
    check_disjoint(val.iter().map(|s| s.id.as_str()), test.iter().map(|s| s.id.as_str()))?;
    let val_scored = score_all(model, val, Split::Validation, cfg, sched, seed)?;
    let test_scored = score_all(model, test, Split::Test, cfg, sched, seed)?;
    evaluate_scored(&val_scored, &test_scored, cfg.grid_points)
}
