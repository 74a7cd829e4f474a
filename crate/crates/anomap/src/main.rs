use anomap::config::{DataSource, RunConfig};
use anomap::dataset::{read_dataset, write_dataset};
use anomap::format::{read_f32r, write_f32r};
use anomap::report;
use anomap::runner::{self, RunOptions};
use anomap_core::airprep::{dataset_stats, decide};
use anomap_core::iqa::{fusion_anomaly_map, fusion_loss, l1_loss, ssim_loss, FusionParams, SsimParams};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Reconstruction-based anomaly segmentation with SSIM/L1 fusion scoring.
#[derive(Parser)]
#[command(name = "anomap", version)]
struct Cli {
    /// Worker threads for folds and sample scoring (0 = all cores).
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a phantom dataset directory.
    Phantom {
        #[command(flatten)]
        common: Common,
        /// Fold whose dataset is written.
        #[arg(long, default_value_t = 0)]
        fold: usize,
    },
    /// Train and evaluate every fold.
    Run {
        #[command(flatten)]
        common: Common,
        /// Write test anomaly maps as F32R files.
        #[arg(long)]
        dump_maps: bool,
    },
    /// Run the l1, ssim, fq and fq_air variants on shared folds.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dump_maps: bool,
    },
    /// Compare two F32R images.
    Iqa {
        image_a: PathBuf,
        image_b: PathBuf,
        /// Weight of the SSIM term.
        #[arg(long, default_value_t = FusionParams::default().alpha)]
        alpha: f64,
        /// Write the fused anomaly map here.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Report validation intensity statistics and the pre-processing decision.
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        fold: usize,
    },
}

fn load_config(common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> anyhow::Result<&Path> {
    cfg.out.as_deref().context("no output directory: pass --out or set `out` under [run]")
}

fn fold_data(cfg: &RunConfig, fold: usize) -> anyhow::Result<anomap_core::phantom::PhantomDataset> {
    match &cfg.data {
        DataSource::Phantom => Ok(cfg.experiment.fold_dataset(fold)?),
        DataSource::Directory(dir) => Ok(read_dataset(dir)?),
    }
}

fn print_report(r: &runner::RunReport) {
    let cell = |m: Option<anomap_core::evalkit::MeanStd>| m.map_or_else(|| "NA".to_owned(), |m| m.to_string());
    println!(
        "{}: dice {} auprc {} ({} folds, {:.1}s)",
        r.variant,
        cell(r.dice),
        cell(r.auprc),
        r.folds.len(),
        r.wall_clock.as_secs_f64()
    );
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    let opts = |dump_maps| RunOptions { workers: cli.workers, keep_maps: dump_maps };
    match &cli.command {
        Command::Phantom { common, fold } => {
            let cfg = load_config(common)?;
            let dir = out_dir(&cfg)?;
            write_dataset(dir, &cfg.experiment.fold_dataset(*fold)?)?;
            std::fs::write(dir.join("config.txt"), cfg.to_canonical())?;
            println!("wrote {}", dir.display());
            Ok(true)
        }
        Command::Run { common, dump_maps } => {
            let cfg = load_config(common)?;
            let dir = out_dir(&cfg)?;
            let report = runner::run(&cfg, opts(*dump_maps))?;
            runner::write_run(dir, &report)?;
            print_report(&report);
            Ok(report.complete())
        }
        Command::Ablate { common, dump_maps } => {
            let cfg = load_config(common)?;
            let dir = out_dir(&cfg)?;
            let reports = runner::ablate(&cfg, opts(*dump_maps))?;
            for r in &reports {
                runner::write_run(&dir.join(r.variant.name()), r)?;
                print_report(r);
            }
            std::fs::write(dir.join("ablation.csv"), report::ablation_csv(&reports))?;
            Ok(reports.iter().all(runner::RunReport::complete))
        }
        Command::Iqa { image_a, image_b, alpha, map } => {
            let a = read_f32r(image_a).with_context(|| image_a.display().to_string())?;
            let b = read_f32r(image_b).with_context(|| image_b.display().to_string())?;
            if (a.width(), a.height()) != (b.width(), b.height()) {
                bail!("size mismatch: {}x{} vs {}x{}", a.width(), a.height(), b.width(), b.height());
            }
            let (ssim, fusion) = (SsimParams::default(), FusionParams::new(*alpha)?);
            let mask = a.foreground_or_full();
            println!("ssim_loss {}", ssim_loss(&a, &b, &ssim, &mask)?);
            println!("l1 {}", l1_loss(&a, &b, &mask)?);
            println!("fusion_loss {}", fusion_loss(&a, &b, &ssim, &fusion, &mask)?);
            if let Some(path) = map {
                let m = fusion_anomaly_map(&a, &b, &ssim, &fusion)?;
                write_f32r(path, m.width(), m.height(), m.scores())?;
            }
            Ok(true)
        }
        Command::Stats { common, fold } => {
            let cfg = load_config(common)?;
            let stats = dataset_stats(&fold_data(&cfg, *fold)?.val)?;
            let csv = report::stats_csv(&stats, &decide(&stats));
            match &cfg.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    std::fs::write(dir.join("stats.csv"), &csv)?;
                }
                None => print!("{csv}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ANOMAP_LOG", "warn")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more folds did not complete");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
