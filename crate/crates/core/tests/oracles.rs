//! Library results against independent brute-force computations.

mod common;

use anomap_core::airprep::dataset_stats;
use anomap_core::denoiser::{batch_gradient, prepare_samples, KernelMixtureModel, TrainConfig, TrainingSample};
use anomap_core::diffusion::{linear_schedule, NoiseParams};
use anomap_core::evalkit::{auprc, dice, greedy_threshold, uniform_grid};
use anomap_core::imagecore::{window_moments, window_stats};
use anomap_core::iqa::{fusion_loss, fusion_loss_grad, ssim_index, ssim_loss, ssim_map, FusionParams, SsimParams};
use anomap_core::phantom::{gen_dataset, ModalityProfile};
use anomap_core::{AnomalyMap, BinaryMask, Image2D};
use common::*;
use rand::Rng;

#[test]
fn window_stats_match_two_pass_everywhere() {
    let mut rng = rng(1);
    let x = random_image(&mut rng, 16, 16);
    let y = random_image(&mut rng, 16, 16);
    let dense = window_moments(&x, &y, 5).unwrap();
    for row in 0..16 {
        for col in 0..16 {
            let want = two_pass(&x, &y, row, col, 5);
            let s = window_stats(&x, &y, row, col, 5).unwrap();
            let d = dense.at(row * 16 + col);
            for (got, name) in [(s, "pointwise"), (d, "dense")] {
                let fields = [got.mean_x, got.mean_y, got.var_x, got.var_y, got.cov_xy];
                for (g, w) in fields.iter().zip(want) {
                    assert!((g - w).abs() < 1e-10, "{name} ({row},{col}): {g} vs {w}");
                }
            }
        }
    }
}

#[test]
fn ssim_map_matches_per_window_evaluation() {
    let p = SsimParams::default();
    let mut rng = rng(2);
    for _ in 0..50 {
        let x = random_image(&mut rng, 16, 16);
        let y = random_image(&mut rng, 16, 16);
        let map = ssim_map(&x, &y, &p).unwrap();
        for row in 0..16 {
            for col in 0..16 {
                let want = ssim_direct(two_pass(&x, &y, row, col, 5), p.c1, p.c2);
                assert!((map.values[row * 16 + col] - want).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn three_term_form_collapses_to_two_factor_form() {
    let p = SsimParams::default();
    let mut rng = rng(3);
    for _ in 0..200 {
        let x = random_image(&mut rng, 5, 5);
        let y = random_image(&mut rng, 5, 5);
        let [mx, my, vx, vy, cv] = two_pass(&x, &y, 2, 2, 5);
        let (sx, sy) = (vx.sqrt(), vy.sqrt());
        let l = (2.0 * mx * my + p.c1) / (mx * mx + my * my + p.c1);
        let c = (2.0 * sx * sy + p.c2) / (vx + vy + p.c2);
        let s = (cv + p.c3) / (sx * sy + p.c3);
        let stats = window_stats(&x, &y, 2, 2, 5).unwrap();
        assert!((ssim_index(&stats, &p) - l * c * s).abs() < 1e-12);
    }
}

#[test]
fn ssim_loss_matches_masked_window_sum() {
    let p = SsimParams::default();
    let mut rng = rng(4);
    for _ in 0..10 {
        let x = random_image(&mut rng, 12, 10);
        let y = random_image(&mut rng, 12, 10);
        let mask = random_mask(&mut rng, 12, 10, 0.6);
        let (mut sum, mut k) = (0.0, 0);
        for row in 0..10 {
            for col in 0..12 {
                if mask.get(row, col) {
                    sum += ssim_direct(two_pass(&x, &y, row, col, 5), p.c1, p.c2);
                    k += 1;
                }
            }
        }
        let want = (1.0 - sum / k as f64) / 2.0;
        assert!((ssim_loss(&x, &y, &p, &mask).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn constant_images_closed_form() {
    let p = SsimParams::default();
    let zeros = Image2D::filled(9, 9, 0.0);
    let ones = Image2D::filled(9, 9, 1.0);
    let want = p.c1 * p.c2 / ((1.0 + p.c1) * p.c2);
    assert!(ssim_map(&zeros, &ones, &p).unwrap().values.iter().all(|v| (v - want).abs() < 1e-12));
    let loss = ssim_loss(&zeros, &ones, &p, &BinaryMask::full(9, 9)).unwrap();
    assert!((loss - (1.0 - want) / 2.0).abs() < 1e-12);
    let x = random_image(&mut rng(5), 9, 9);
    assert!(ssim_map(&x, &x, &p).unwrap().values.iter().all(|&v| v == 1.0));
}

fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-12 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[test]
fn fusion_gradient_matches_central_differences() {
    let (p, f) = (SsimParams::default(), FusionParams::default());
    let h = 1e-4;
    let mut rng = rng(6);
    for _ in 0..5 {
        let x = random_image(&mut rng, 8, 8);
        // Keep |y - x| well away from the L1 kink so the difference quotient is smooth.
        let y = Image2D::new(
            8,
            8,
            x.pixels()
                .iter()
                .map(|v| v + rng.random_range(0.01..0.3) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                .collect(),
        )
        .unwrap();
        let mask = BinaryMask::full(8, 8);
        let grad = fusion_loss_grad(&x, &y, &p, &f, &mask).unwrap();
        for _ in 0..20 {
            let q = rng.random_range(0..64);
            let shifted = |d: f64| {
                let mut v = y.pixels().to_vec();
                v[q] += d;
                fusion_loss(&x, &y.with_pixels(v).unwrap(), &p, &f, &mask).unwrap()
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let err = relative_error(grad[q], fd);
            assert!(err < 1e-4, "pixel {q}: analytic {} vs numeric {fd} (rel {err:e})", grad[q]);
        }
    }
}

#[test]
fn mixture_parameter_gradient_matches_central_differences() {
    let sched = linear_schedule(1000, 1e-4, 0.02).unwrap();
    let data = gen_dataset(3, 32, &ModalityProfile::t2_like(), 6, 1, 1).unwrap();
    let images: Vec<Image2D> = data.train.iter().map(|s| s.image.clone()).collect();
    let mut model = KernelMixtureModel::standard(1000).unwrap();
    // Shrink the predictions so that almost nothing sits on the clamp.
    for w in model.weights_mut() {
        *w *= 0.8;
    }
    for b in model.biases_mut() {
        *b = 0.05;
    }
    let cfg = TrainConfig { noise: NoiseParams::gaussian(), seed: 4, ..TrainConfig::default() };
    let samples = prepare_samples(&model, &images, &sched, &cfg).unwrap();
    let batch: Vec<&TrainingSample> = samples.iter().collect();
    let (p, f) = (SsimParams::default(), FusionParams::default());
    let g = batch_gradient(&model, &batch, &p, &f).unwrap();
    let h = 1e-6;
    let loss_at = |m: &KernelMixtureModel| batch_gradient(m, &batch, &p, &f).unwrap().loss();
    let used: std::collections::BTreeSet<usize> = samples.iter().map(|s| s.bucket).collect();
    let k = model.kernel_count();
    let mut checked = 0;
    for i in 0..model.weights().len() + model.biases().len() {
        let analytic = if i < model.weights().len() { g.weights[i] } else { g.biases[i - model.weights().len()] };
        let nudge = |d: f64| {
            let mut m = model.clone();
            let nw = m.weights().len();
            if i < nw {
                m.weights_mut()[i] += d;
            } else {
                m.biases_mut()[i - nw] += d;
            }
            loss_at(&m)
        };
        let fd = (nudge(h) - nudge(-h)) / (2.0 * h);
        let bucket = if i < model.weights().len() { i / k } else { i - model.weights().len() };
        if !used.contains(&bucket) {
            assert_eq!(analytic, 0.0);
            assert_eq!(fd, 0.0);
            continue;
        }
        assert!(relative_error(analytic, fd) < 1e-4, "param {i}: analytic {analytic} vs numeric {fd}");
        checked += 1;
    }
    assert!(checked >= 2 * (k + 1));
}

#[test]
fn auprc_hand_example() {
    let map = AnomalyMap::new(3, 1, vec![0.9, 0.8, 0.7]).unwrap();
    let gt = BinaryMask::new(3, 1, vec![true, false, true]).unwrap();
    let area = auprc(&[map], &[gt], &[BinaryMask::full(3, 1)]).unwrap();
    assert!((area - 0.8333333333333334).abs() < 1e-12);
    assert!((area - (0.5 * 1.0 + 0.5 * (2.0 / 3.0))).abs() < 1e-12);
}

fn brute_pooled_dice(maps: &[AnomalyMap], gts: &[BinaryMask], regions: &[BinaryMask], t: f64) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for ((m, g), r) in maps.iter().zip(gts).zip(regions) {
        for i in 0..m.scores().len() {
            let pred = r.bits()[i] && m.scores()[i] >= t;
            match (pred, g.bits()[i]) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                _ => {}
            }
        }
    }
    if tp + fp + fn_ == 0 {
        1.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

#[test]
fn dice_and_threshold_match_exhaustive_scans() {
    let mut rng = rng(7);
    for _ in 0..20 {
        let n = rng.random_range(1..4);
        let (w, h) = (rng.random_range(2..7), rng.random_range(2..7));
        let mut maps = Vec::new();
        let mut gts = Vec::new();
        let mut regions = Vec::new();
        for _ in 0..n {
            // Coarse scores so that ties and grid hits actually happen.
            let scores = (0..w * h).map(|_| rng.random_range(0..10) as f64 / 10.0).collect();
            maps.push(AnomalyMap::new(w, h, scores).unwrap());
            gts.push(random_mask(&mut rng, w, h, 0.3));
            regions.push(random_mask(&mut rng, w, h, 0.8));
        }
        let a = random_mask(&mut rng, w, h, 0.5);
        let want = brute_pooled_dice(
            &[AnomalyMap::new(w, h, a.bits().iter().map(|&b| b as u8 as f64).collect()).unwrap()],
            &gts[..1],
            &[BinaryMask::full(w, h)],
            0.5,
        );
        assert_eq!(dice(&a, &gts[0]).unwrap(), want);

        let max = maps.iter().map(AnomalyMap::max).fold(0.0, f64::max);
        let grid = uniform_grid(max, 50).unwrap();
        let chosen = greedy_threshold(&maps, &gts, &regions, &grid).unwrap();
        let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &t in &grid {
            let d = brute_pooled_dice(&maps, &gts, &regions, t);
            if d > best.0 || (d == best.0 && t > best.1) {
                best = (d, t);
            }
        }
        assert_eq!(chosen, best.1);
        assert_eq!(brute_pooled_dice(&maps, &gts, &regions, chosen), best.0);
    }
}

#[test]
fn dataset_stats_match_flat_concatenation() {
    let data = gen_dataset(8, 48, &ModalityProfile::flair_like(), 1, 5, 1).unwrap();
    let stats = dataset_stats(&data.val).unwrap();
    let (mut normal, mut lesion) = (Vec::new(), Vec::new());
    for s in &data.val {
        for i in 0..s.image.len() {
            if s.anomaly_gt.bits()[i] {
                lesion.push(s.image.pixels()[i]);
            } else if s.foreground.bits()[i] {
                normal.push(s.image.pixels()[i]);
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!((stats.mu_n - mean(&normal)).abs() < 1e-12);
    assert!((stats.mu_a - mean(&lesion)).abs() < 1e-12);
    assert_eq!((stats.n_pixels_normal, stats.n_pixels_anomalous), (normal.len(), lesion.len()));
}
