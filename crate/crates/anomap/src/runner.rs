//! Fold execution on a worker pool and report output.
//!
//! Folds, and samples within a fold, are scored concurrently. Every random
//! draw is keyed by fold and sample index, and results are collected in
//! index order, so reports do not depend on the worker count.

use crate::config::{DataSource, ModelKind, RunConfig};
use crate::dataset::read_dataset;
use crate::external::ExternalReconstructor;
use crate::format::write_f32r;
use crate::report;
use anomap_core::airprep::{DatasetStats, PreprocessDecision};
use anomap_core::denoiser::{BlurDenoiser, Denoiser, KernelMixtureModel};
use anomap_core::diffusion::DiffusionSchedule;
use anomap_core::evalkit::{
    check_disjoint, evaluate_scored, score_sample, scoring_seed, EvalConfig, FoldResult, MeanStd, ScoredSample, Split,
};
use anomap_core::phantom::{LabeledSample, PhantomDataset};
use anomap_core::pipeline::{prepare_fold, train_fold_model, Variant};
use anyhow::Context as _;
use rayon::prelude::*;
use std::path::Path;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Worker threads; 0 lets the pool pick.
    pub workers: usize,
    /// Keep test anomaly maps in the report so they can be written out.
    pub keep_maps: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { workers: 1, keep_maps: false }
    }
}

#[derive(Debug, Clone)]
pub struct FoldSummary {
    pub result: FoldResult,
    pub stats: DatasetStats,
    pub decision: PreprocessDecision,
    pub loss_trace: Vec<f64>,
    /// The trained denoiser, for mixture models.
    pub model: Option<KernelMixtureModel>,
    pub test_maps: Option<Vec<ScoredSample>>,
}

#[derive(Debug, Clone)]
pub struct FoldRecord {
    pub fold: usize,
    /// The fold's summary, or the message of the error that aborted it.
    pub outcome: Result<FoldSummary, String>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub variant: Variant,
    pub folds: Vec<FoldRecord>,
    /// Across-fold statistics; `None` unless every fold completed.
    pub dice: Option<MeanStd>,
    pub auprc: Option<MeanStd>,
    pub sample_dice: Option<MeanStd>,
    pub config_echo: String,
    pub wall_clock: Duration,
}

impl RunReport {
    pub fn complete(&self) -> bool {
        self.folds.iter().all(|f| f.outcome.is_ok())
    }
}

fn score_split<D: Denoiser + Sync + ?Sized>(
    model: &D,
    samples: &[LabeledSample],
    split: Split,
    cfg: &EvalConfig,
    sched: &DiffusionSchedule,
    seed: u64,
) -> anomap_core::Result<Vec<ScoredSample>> {
    samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| Ok(ScoredSample::new(s, score_sample(model, s, cfg, sched, scoring_seed(seed, split, i))?)))
        .collect()
}

fn run_fold(cfg: &RunConfig, fold: usize, shared: Option<&PhantomDataset>, keep_maps: bool) -> anomap_core::Result<FoldSummary> {
    let x = &cfg.experiment;
    let owned;
    let data = match shared {
        Some(d) => d,
        None => {
            owned = x.fold_dataset(fold)?;
            &owned
        }
    };
    let prepared = prepare_fold(x, data)?;
    let (val, test) = (&prepared.data.val, &prepared.data.test);
    check_disjoint(val.iter().map(|s| s.id.as_str()), test.iter().map(|s| s.id.as_str()))?;
    let sched = x.schedule()?;
    let eval = x.eval_config()?;
    let seed = x.fold_seed(fold);
    let score = |model: &(dyn Denoiser + Sync)| -> anomap_core::Result<_> {
        Ok((
            score_split(model, val, Split::Validation, &eval, &sched, seed)?,
            score_split(model, test, Split::Test, &eval, &sched, seed)?,
        ))
    };
    let (loss_trace, model, (val_scored, test_scored)) = match &cfg.model {
        ModelKind::Mixture => {
            let trained = train_fold_model(x, fold, &prepared)?;
            let scored = score(&trained.model)?;
            (trained.loss_trace, Some(trained.model), scored)
        }
        ModelKind::Blur { sigma } => (Vec::new(), None, score(&BlurDenoiser::new(*sigma)?)?),
        ModelKind::External { dir } => {
            let model = ExternalReconstructor::open(dir).map_err(|e| anomap_core::Error::Model(e.to_string()))?;
            (Vec::new(), None, score(&model)?)
        }
    };
    let result = evaluate_scored(&val_scored, &test_scored, eval.grid_points)?;
    log::info!("fold {fold} ({}): dice {:.4} auprc {:.4}", x.variant, result.dice, result.auprc);
    Ok(FoldSummary {
        result,
        stats: prepared.stats,
        decision: prepared.decision,
        loss_trace,
        model,
        test_maps: keep_maps.then_some(test_scored),
    })
}

fn across_folds(folds: &[FoldRecord], metric: impl Fn(&FoldSummary) -> f64) -> Option<MeanStd> {
    let values: Option<Vec<f64>> = folds.iter().map(|f| f.outcome.as_ref().ok().map(&metric)).collect();
    MeanStd::of(&values?).ok()
}

/// Runs every configured fold on the current rayon pool.
pub fn run_folds(cfg: &RunConfig, keep_maps: bool) -> anyhow::Result<RunReport> {
    let started = Instant::now();
    let shared = match &cfg.data {
        DataSource::Phantom => None,
        DataSource::Directory(dir) => Some(read_dataset(dir).with_context(|| format!("loading {}", dir.display()))?),
    };
    let folds: Vec<FoldRecord> = (0..cfg.experiment.folds)
        .into_par_iter()
        .map(|fold| {
            let outcome = run_fold(cfg, fold, shared.as_ref(), keep_maps).map_err(|e| {
                log::error!("fold {fold} failed: {e}");
                e.to_string()
            });
            FoldRecord { fold, outcome }
        })
        .collect();
    Ok(RunReport {
        variant: cfg.experiment.variant,
        dice: across_folds(&folds, |f| f.result.dice),
        auprc: across_folds(&folds, |f| f.result.auprc),
        sample_dice: across_folds(&folds, |f| f.result.mean_sample_dice()),
        folds,
        config_echo: cfg.to_canonical(),
        wall_clock: started.elapsed(),
    })
}

fn pool(workers: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers).build()?)
}

pub fn run(cfg: &RunConfig, opts: RunOptions) -> anyhow::Result<RunReport> {
    pool(opts.workers)?.install(|| run_folds(cfg, opts.keep_maps))
}

/// Runs all four variants on the same folds and seeds.
pub fn ablate(cfg: &RunConfig, opts: RunOptions) -> anyhow::Result<Vec<RunReport>> {
    let pool = pool(opts.workers)?;
    Variant::ALL
        .iter()
        .filter(|v| !(v.uses_air() && matches!(cfg.model, ModelKind::External { .. })))
        .map(|&variant| {
            let mut c = cfg.clone();
            c.experiment.variant = variant;
            pool.install(|| run_folds(&c, opts.keep_maps))
        })
        .collect()
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes the run's CSV tables, the config echo and (if kept) test anomaly maps.
pub fn write_run(dir: &Path, report: &RunReport) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write(&dir.join("report.csv"), &report::report_csv(report))?;
    write(&dir.join("samples.csv"), &report::samples_csv(report))?;
    write(&dir.join("summary.csv"), &report::summary_csv(report))?;
    write(&dir.join("preprocessing.csv"), &report::preprocessing_csv(report))?;
    write(&dir.join("loss.csv"), &report::loss_csv(report))?;
    write(&dir.join("config.txt"), &report.config_echo)?;
    for f in &report.folds {
        let Ok(o) = &f.outcome else { continue };
        for s in o.test_maps.iter().flatten() {
            let path = dir.join("maps").join(format!("fold-{}", f.fold)).join(format!("{}.f32r", s.id));
            write_f32r(&path, s.map.width(), s.map.height(), s.map.scores())?;
        }
    }
    Ok(())
}
