//! CSV renderings of run, ablation and statistics reports.
//!
//! Every table has a header row, comma separators and `\n` line endings.
//! Metrics of incomplete folds are written as `NA`.

use crate::runner::RunReport;
use anomap_core::airprep::{air, DatasetStats, PreprocessDecision};
use anomap_core::evalkit::MeanStd;
use std::fmt::Write as _;

const NA: &str = "NA";

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_owned(), num)
}

/// `fold,dice,auprc,threshold`, one row per configured fold.
pub fn report_csv(report: &RunReport) -> String {
    let mut s = String::from("fold,dice,auprc,threshold\n");
    for f in &report.folds {
        match &f.outcome {
            Ok(o) => {
                let r = &o.result;
                let _ = writeln!(s, "{},{},{},{}", f.fold, num(r.dice), num(r.auprc), num(r.threshold));
            }
            Err(_) => {
                let _ = writeln!(s, "{},{NA},{NA},{NA}", f.fold);
            }
        }
    }
    s
}

/// `fold,id,dice,tp,fp,fn` for every test sample of every complete fold.
pub fn samples_csv(report: &RunReport) -> String {
    let mut s = String::from("fold,id,dice,tp,fp,fn\n");
    for f in &report.folds {
        if let Ok(o) = &f.outcome {
            for p in &o.result.per_sample {
                let c = p.counts;
                let _ = writeln!(s, "{},{},{},{},{},{}", f.fold, p.id, num(p.dice), c.tp, c.fp, c.fn_);
            }
        }
    }
    s
}

fn mean_std_cells(m: Option<MeanStd>) -> String {
    match m {
        Some(m) => format!("{},{}", num(m.mean), num(m.std)),
        None => format!("{NA},{NA}"),
    }
}

/// `metric,mean,std` across folds: pooled Dice, AUPRC and sample-averaged Dice.
pub fn summary_csv(report: &RunReport) -> String {
    let mut s = String::from("metric,mean,std\n");
    let _ = writeln!(s, "dice,{}", mean_std_cells(report.dice));
    let _ = writeln!(s, "auprc,{}", mean_std_cells(report.auprc));
    let _ = writeln!(s, "sample_dice,{}", mean_std_cells(report.sample_dice));
    s
}

/// AIR before and after the decided transform; `None` when a mean is zero.
pub fn air_pair(stats: &DatasetStats, decision: &PreprocessDecision) -> (Option<f64>, Option<f64>) {
    let before = air(stats).ok();
    let after = if decision.flip {
        DatasetStats::from_means(1.0 - stats.mu_n, 1.0 - stats.mu_a).ok().and_then(|s| air(&s).ok())
    } else {
        before
    };
    (before, after)
}

/// `mu_n,mu_a,air_before,air_after,flip`.
pub fn stats_csv(stats: &DatasetStats, decision: &PreprocessDecision) -> String {
    let (before, after) = air_pair(stats, decision);
    format!(
        "mu_n,mu_a,air_before,air_after,flip\n{},{},{},{},{}\n",
        num(stats.mu_n),
        num(stats.mu_a),
        opt(before),
        opt(after),
        decision.flip
    )
}

/// Per-fold pre-processing statistics: `fold,mu_n,mu_a,air_before,air_after,flip`.
pub fn preprocessing_csv(report: &RunReport) -> String {
    let mut s = String::from("fold,mu_n,mu_a,air_before,air_after,flip\n");
    for f in &report.folds {
        if let Ok(o) = &f.outcome {
            let (before, after) = air_pair(&o.stats, &o.decision);
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                f.fold,
                num(o.stats.mu_n),
                num(o.stats.mu_a),
                opt(before),
                opt(after),
                o.decision.flip
            );
        }
    }
    s
}

/// `fold,epoch,loss` training traces.
pub fn loss_csv(report: &RunReport) -> String {
    let mut s = String::from("fold,epoch,loss\n");
    for f in &report.folds {
        if let Ok(o) = &f.outcome {
            for (epoch, l) in o.loss_trace.iter().enumerate() {
                let _ = writeln!(s, "{},{epoch},{}", f.fold, num(*l));
            }
        }
    }
    s
}

/// `variant,dice_mean,dice_std,auprc_mean,auprc_std`, one row per variant.
pub fn ablation_csv(reports: &[RunReport]) -> String {
    let mut s = String::from("variant,dice_mean,dice_std,auprc_mean,auprc_std\n");
    for r in reports {
        let _ = writeln!(s, "{},{},{}", r.variant, mean_std_cells(r.dice), mean_std_cells(r.auprc));
    }
    s
}
