use anomap_core::denoiser::{train, BlurDenoiser, IdentityOracle, KernelMixtureModel, TrainConfig};
use anomap_core::diffusion::linear_schedule;
use anomap_core::evalkit::{
    evaluate_fold, evaluate_scored, score_all, score_sample, EvalConfig, MeanStd, ScoredSample, Split,
};
use anomap_core::iqa::{fusion_anomaly_map, FusionParams, SsimParams};
use anomap_core::phantom::{gen_abnormal, gen_dataset, ModalityProfile};
use anomap_core::{Error, Image2D};

fn region_means(map: &anomap_core::AnomalyMap, s: &anomap_core::phantom::LabeledSample) -> (f64, f64) {
    let (mut a, mut na, mut b, mut nb) = (0.0, 0, 0.0, 0);
    for i in 0..map.scores().len() {
        if !s.foreground.bits()[i] {
            continue;
        }
        if s.anomaly_gt.bits()[i] {
            a += map.scores()[i];
            na += 1;
        } else {
            b += map.scores()[i];
            nb += 1;
        }
    }
    (a / na as f64, b / nb as f64)
}

/// At the default corruption level a fixed blur cannot undo the noise, so its
/// reconstruction carries little of the image and scores mostly follow
/// intensity: bright lesions still stand out, by roughly `mu_a / mu_n`.
#[test]
fn blur_model_highlights_lesions() {
    let sched = linear_schedule(1000, 1e-4, 0.02).unwrap();
    let cfg = EvalConfig::default();
    let model = BlurDenoiser::new(1.0).unwrap();
    for seed in 0..5 {
        let s = gen_abnormal(seed, 64, &ModalityProfile::flair_like()).unwrap();
        let map = score_sample(&model, &s, &cfg, &sched, seed).unwrap();
        let (inside, outside) = region_means(&map, &s);
        assert!(inside > 1.1 * outside, "seed {seed}: {inside} vs {outside}");
    }
}

#[test]
fn trained_model_highlights_lesions_strongly() {
    let sched = linear_schedule(1000, 1e-4, 0.02).unwrap();
    let data = gen_dataset(1, 32, &ModalityProfile::flair_like(), 30, 5, 1).unwrap();
    let images: Vec<Image2D> = data.train.iter().map(|s| s.image.clone()).collect();
    let cfg = TrainConfig { epochs: 60, ..TrainConfig::default() };
    let (ssim, fusion) = (SsimParams::default(), FusionParams::default());
    let model = train(KernelMixtureModel::standard(1000).unwrap(), &images, &sched, &cfg, &ssim, &fusion).unwrap().model;
    let eval = EvalConfig::default();
    for (i, s) in data.val.iter().enumerate() {
        let (inside, outside) = region_means(&score_sample(&model, s, &eval, &sched, i as u64).unwrap(), s);
        assert!(inside > 2.0 * outside, "{}: {inside} vs {outside}", s.id);
    }
}

#[test]
fn raw_fusion_map_is_larger_inside_lesions() {
    let s = gen_abnormal(3, 64, &ModalityProfile::flair_like()).unwrap();
    let x = s.image.clone().with_foreground(s.foreground.clone()).unwrap();
    let recon = anomap_core::denoiser::Denoiser::denoise(
        &BlurDenoiser::new(2.0).unwrap(),
        &x,
        1,
        &Default::default(),
    )
    .unwrap();
    let map = fusion_anomaly_map(&s.image, &recon, &SsimParams::default(), &FusionParams::default()).unwrap();
    let (inside, outside) = region_means(&map, &s);
    assert!(inside > outside);
}

/// A faint texture: against strong texture a pure intensity shift barely
/// moves the luminance term and plain L1 separates better.
#[test]
fn darkened_block_stands_out_more_with_ssim() {
    let x = Image2D::from_fn(16, 16, |r, c| 0.5 + 0.02 * ((r * 5 + c * 3) as f64 * 0.9).sin()).unwrap();
    let inside = |r: usize, c: usize| (6..10).contains(&r) && (6..10).contains(&c);
    let y = Image2D::from_fn(16, 16, |r, c| x.get(r, c) - if inside(r, c) { 0.05 } else { 0.0 }).unwrap();
    let gap = |alpha: f64| {
        let m = fusion_anomaly_map(&x, &y, &SsimParams::default(), &FusionParams::new(alpha).unwrap()).unwrap();
        let (mut a, mut b) = (0.0, 0.0);
        for r in 0..16 {
            for c in 0..16 {
                if inside(r, c) {
                    a += m.get(r, c) / 16.0;
                } else {
                    b += m.get(r, c) / 240.0;
                }
            }
        }
        assert!(a > b);
        a - b
    };
    assert!(gap(0.84) > gap(0.0));
}

#[test]
fn perfect_reconstruction_degenerates_cleanly() {
    let sched = linear_schedule(1000, 1e-4, 0.02).unwrap();
    let data = gen_dataset(4, 32, &ModalityProfile::flair_like(), 1, 3, 3).unwrap();
    let r = evaluate_fold(&IdentityOracle, &data.val, &data.test, &EvalConfig::default(), &sched, 0).unwrap();
    assert_eq!(r.threshold, 0.0);
    let (lesion, fg): (usize, usize) =
        data.test.iter().map(|s| (s.anomaly_gt.count(), s.foreground.count())).fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    assert!((r.auprc - lesion as f64 / fg as f64).abs() < 1e-12);
}

#[test]
fn evaluating_on_validation_is_optimal() {
    let sched = linear_schedule(1000, 1e-4, 0.02).unwrap();
    let data = gen_dataset(5, 32, &ModalityProfile::flair_like(), 1, 6, 6).unwrap();
    let cfg = EvalConfig::default();
    let model = BlurDenoiser::new(1.0).unwrap();
    let val = score_all(&model, &data.val, Split::Validation, &cfg, &sched, 1).unwrap();
    let test = score_all(&model, &data.test, Split::Test, &cfg, &sched, 1).unwrap();
    let on_val = evaluate_scored(&val, &val, cfg.grid_points).unwrap();
    let on_test = evaluate_scored(&val, &test, cfg.grid_points).unwrap();
    assert_eq!(on_val.threshold, on_test.threshold);
    // Any other threshold chosen on other data cannot beat the tuned one on its own split.
    let cross = evaluate_scored(&test, &val, cfg.grid_points).unwrap();
    assert!(on_val.dice >= cross.dice);
    assert_eq!(on_test.per_sample.len(), 6);
}

#[test]
fn scoring_is_order_independent() {
    let sched = linear_schedule(1000, 1e-4, 0.02).unwrap();
    let data = gen_dataset(6, 32, &ModalityProfile::t2_like(), 1, 4, 1).unwrap();
    let cfg = EvalConfig { t_test: 500, ..EvalConfig::default() };
    let model = BlurDenoiser::new(1.0).unwrap();
    let all = score_all(&model, &data.val, Split::Validation, &cfg, &sched, 9).unwrap();
    let last = score_all(&model, &data.val, Split::Validation, &cfg, &sched, 9).unwrap().pop().unwrap();
    assert_eq!(all[3], last);
    let as_test = score_all(&model, &data.val, Split::Test, &cfg, &sched, 9).unwrap();
    assert_ne!(all[0].map, as_test[0].map);
}

#[test]
fn shared_identifiers_are_rejected() {
    let sched = linear_schedule(1000, 1e-4, 0.02).unwrap();
    let data = gen_dataset(7, 32, &ModalityProfile::flair_like(), 1, 2, 2).unwrap();
    let err = evaluate_fold(&IdentityOracle, &data.val, &data.val, &EvalConfig::default(), &sched, 0).unwrap_err();
    assert_eq!(err, Error::Leakage);
    let empty: Vec<ScoredSample> = Vec::new();
    assert!(evaluate_scored(&empty, &empty, 10).is_err());
}

#[test]
fn larger_lesion_gap_is_easier() {
    let sched = linear_schedule(1000, 1e-4, 0.02).unwrap();
    let cfg = EvalConfig::default();
    let model = BlurDenoiser::new(1.0).unwrap();
    let base = ModalityProfile::flair_like();
    let dices: Vec<f64> = [0.1, 0.3]
        .iter()
        .map(|&gap| {
            let data = gen_dataset(8, 48, &base.with_lesion_gap(gap), 1, 8, 8).unwrap();
            evaluate_fold(&model, &data.val, &data.test, &cfg, &sched, 2).unwrap().dice
        })
        .collect();
    assert!(dices[1] > dices[0], "{dices:?}");
}

#[test]
fn fold_summary_uses_population_spread() {
    let s = MeanStd::of(&[0.5, 0.7]).unwrap();
    assert!((s.mean - 0.6).abs() < 1e-15 && (s.std - 0.1).abs() < 1e-15);
    assert_eq!(s.to_string(), "0.6000±0.1000");
}
