//! One train/evaluate fold on phantom data, parameterised by ablation variant.

use crate::airprep::{apply_sample, dataset_stats, decide, DatasetStats, PreprocessDecision};
use crate::denoiser::{train, KernelMixtureModel, TrainConfig, TrainOutcome};
use crate::diffusion::{linear_schedule, DiffusionSchedule};
use crate::evalkit::{evaluate_fold, EvalConfig, FoldResult};
use crate::iqa::FusionParams;
use crate::phantom::{gen_dataset, LabeledSample, ModalityProfile, PhantomDataset};
use crate::rng::{derive_seed, stream};
use crate::{Error, Result};
use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// Loss and pre-processing combination under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Pure L1 (`alpha = 0`).
    L1,
    /// Pure SSIM (`alpha = 1`).
    Ssim,
    /// SSIM/L1 fusion at the configured alpha.
    Fq,
    /// Fusion plus the AIR-driven intensity flip.
    FqAir,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::L1, Variant::Ssim, Variant::Fq, Variant::FqAir];

    pub fn name(self) -> &'static str {
        match self {
            Variant::L1 => "l1",
            Variant::Ssim => "ssim",
            Variant::Fq => "fq",
            Variant::FqAir => "fq_air",
        }
    }

    /// Fusion weight used for both training and anomaly maps.
    pub fn alpha(self, fused: f64) -> f64 {
        match self {
            Variant::L1 => 0.0,
            Variant::Ssim => 1.0,
            Variant::Fq | Variant::FqAir => fused,
        }
    }

    pub fn uses_air(self) -> bool {
        self == Variant::FqAir
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown variant '{s}'")))
    }
}

/// Everything needed to run the folds of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub profile: ModalityProfile,
    pub size: usize,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub variant: Variant,
    /// Fusion weight of the `fq` variants.
    pub alpha: f64,
    pub steps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    /// Kernel widths of the mixture denoiser.
    pub sigmas: Vec<f64>,
    pub buckets: usize,
    pub train: TrainConfig,
    /// Evaluation settings; `fusion` is overridden by the variant.
    pub eval: EvalConfig,
    pub folds: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Desk-scale defaults for a profile: 64×64 images, 200/30/60 split, five folds.
    pub fn for_profile(profile: ModalityProfile) -> Self {
        Self {
            eval: EvalConfig { t_test: profile.kind.default_t_test(), ..EvalConfig::default() },
            profile,
            size: 64,
            n_train: 200,
            n_val: 30,
            n_test: 60,
            variant: Variant::FqAir,
            alpha: FusionParams::default().alpha,
            steps: 1000,
            beta_start: 1e-4,
            beta_end: 0.02,
            sigmas: alloc::vec![0.0, 0.5, 1.0, 2.0, 4.0],
            buckets: 8,
            train: TrainConfig::default(),
            folds: 5,
            seed: 0,
        }
    }

    pub fn fusion(&self) -> Result<FusionParams> {
        FusionParams::new(self.variant.alpha(self.alpha))
    }

    pub fn schedule(&self) -> Result<DiffusionSchedule> {
        linear_schedule(self.steps, self.beta_start, self.beta_end)
    }

    /// Evaluation settings with the variant's fusion weight.
    pub fn eval_config(&self) -> Result<EvalConfig> {
        Ok(EvalConfig { fusion: self.fusion()?, ..self.eval.clone() })
    }

    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        FusionParams::new(self.alpha)?;
        self.train.validate()?;
        self.eval_config()?.validate()?;
        if self.folds == 0 {
            return Err(Error::invalid("at least one fold is required"));
        }
        if self.eval.t_test == 0 || self.eval.t_test > self.steps {
            return Err(Error::StepOutOfRange { t: self.eval.t_test, steps: self.steps });
        }
        Ok(())
    }

    /// Seed of fold `fold`; folds are independent phantom datasets.
    pub fn fold_seed(&self, fold: usize) -> u64 {
        derive_seed(self.seed, stream::FOLD, fold as u64)
    }

    /// The phantom dataset of a fold, before any pre-processing.
    pub fn fold_dataset(&self, fold: usize) -> Result<PhantomDataset> {
        gen_dataset(self.fold_seed(fold), self.size, &self.profile, self.n_train, self.n_val, self.n_test)
    }
}

/// A fold's splits after pre-processing, with the statistics behind the decision.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    /// Validation statistics before pre-processing.
    pub stats: DatasetStats,
    pub decision: PreprocessDecision,
    pub data: PhantomDataset,
}

#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub fold: usize,
    pub result: FoldResult,
    pub stats: DatasetStats,
    pub decision: PreprocessDecision,
    pub loss_trace: Vec<f64>,
    pub model: KernelMixtureModel,
}

fn preprocess(samples: &[LabeledSample], d: &PreprocessDecision) -> Result<Vec<LabeledSample>> {
    samples.iter().map(|s| apply_sample(s, d)).collect()
}

/// Measures validation statistics and applies the variant's pre-processing
/// to all three splits. Only the AIR variant ever flips.
pub fn prepare_fold(cfg: &ExperimentConfig, data: &PhantomDataset) -> Result<PreparedFold> {
    let stats = dataset_stats(&data.val)?;
    let decision = if cfg.variant.uses_air() { decide(&stats) } else { PreprocessDecision::identity(stats) };
    let data = PhantomDataset {
        train: preprocess(&data.train, &decision)?,
        val: preprocess(&data.val, &decision)?,
        test: preprocess(&data.test, &decision)?,
    };
    Ok(PreparedFold { stats, decision, data })
}

/// Trains a fresh mixture denoiser on the healthy split of a prepared fold.
pub fn train_fold_model(cfg: &ExperimentConfig, fold: usize, prepared: &PreparedFold) -> Result<TrainOutcome> {
    let model = KernelMixtureModel::new(&cfg.sigmas, cfg.buckets, cfg.steps)?;
    let train_cfg = TrainConfig { seed: derive_seed(cfg.fold_seed(fold), stream::TRAIN, u64::MAX), ..cfg.train };
    let images: Vec<_> = prepared.data.train.iter().map(|s| s.image.clone()).collect();
    let outcome = train(model, &images, &cfg.schedule()?, &train_cfg, &cfg.eval.ssim, &cfg.fusion()?)?;
    log::info!(
        "fold {fold} ({}): final training loss {:.5}",
        cfg.variant,
        outcome.loss_trace.last().copied().unwrap_or(f64::NAN)
    );
    Ok(outcome)
}

/// Pre-processes `data`, trains on its healthy split and evaluates on its
/// unhealthy splits.
pub fn run_fold_on(cfg: &ExperimentConfig, fold: usize, data: &PhantomDataset) -> Result<FoldOutcome> {
    cfg.validate()?;
    let prepared = prepare_fold(cfg, data)?;
    let outcome = train_fold_model(cfg, fold, &prepared)?;
    let (val, test) = (&prepared.data.val, &prepared.data.test);
    let result = evaluate_fold(&outcome.model, val, test, &cfg.eval_config()?, &cfg.schedule()?, cfg.fold_seed(fold))?;
    log::info!("fold {fold} ({}): dice {:.4} auprc {:.4}", cfg.variant, result.dice, result.auprc);
    Ok(FoldOutcome {
        fold,
        result,
        stats: prepared.stats,
        decision: prepared.decision,
        loss_trace: outcome.loss_trace,
        model: outcome.model,
    })
}

/// [`run_fold_on`] the fold's own phantom dataset.
pub fn run_fold(cfg: &ExperimentConfig, fold: usize) -> Result<FoldOutcome> {
    cfg.validate()?;
    run_fold_on(cfg, fold, &cfg.fold_dataset(fold)?)
}
