use crate::iqa::AnomalyMap;
use crate::{BinaryMask, Error, Result};
use alloc::vec::Vec;

/// Pixel counts of a thresholded prediction against ground truth.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn of(pred: &BinaryMask, gt: &BinaryMask) -> Result<Self> {
        gt.same_shape(pred.width(), pred.height())?;
        let mut c = Confusion::default();
        for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
            match (p, g) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                _ => {}
            }
        }
        Ok(c)
    }

    /// `2TP / (2TP + FP + FN)`, with two empty masks counting as perfect agreement.
    pub fn dice(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            1.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }

    pub fn merge(self, other: Confusion) -> Confusion {
        Confusion { tp: self.tp + other.tp, fp: self.fp + other.fp, fn_: self.fn_ + other.fn_ }
    }
}

/// Dice overlap of two masks; 1.0 when both are empty.
pub fn dice(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    Ok(Confusion::of(pred, gt)?.dice())
}

/// Prediction `score >= threshold`, restricted to `region`.
pub fn predict(map: &AnomalyMap, region: &BinaryMask, threshold: f64) -> Result<BinaryMask> {
    map.threshold(threshold).and(region)
}

fn check_sets(maps: &[AnomalyMap], gts: &[BinaryMask], regions: &[BinaryMask]) -> Result<()> {
    if maps.is_empty() {
        return Err(Error::EmptyData);
    }
    if maps.len() != gts.len() || maps.len() != regions.len() {
        return Err(Error::invalid("maps, ground truths and regions must pair up"));
    }
    for ((m, g), r) in maps.iter().zip(gts).zip(regions) {
        g.same_shape(m.width(), m.height())?;
        r.same_shape(m.width(), m.height())?;
    }
    Ok(())
}

/// In-region `(score, label)` pairs of all samples, sorted by descending score.
fn ranked(maps: &[AnomalyMap], gts: &[BinaryMask], regions: &[BinaryMask]) -> Vec<(f64, bool)> {
    let mut pixels: Vec<(f64, bool)> = maps
        .iter()
        .zip(gts)
        .zip(regions)
        .flat_map(|((m, g), r)| {
            m.scores()
                .iter()
                .zip(g.bits())
                .zip(r.bits())
                .filter_map(|((&s, &l), &inside)| inside.then_some((s, l)))
        })
        .collect();
    pixels.sort_by(|a, b| b.0.total_cmp(&a.0));
    pixels
}

/// Area under the pooled precision-recall curve over in-region pixels.
///
/// Pixels with equal scores enter the curve together, so ties never depend
/// on input order: `Σ ΔR · P` over distinct-score groups.
pub fn auprc(maps: &[AnomalyMap], gts: &[BinaryMask], regions: &[BinaryMask]) -> Result<f64> {
    check_sets(maps, gts, regions)?;
    let pixels = ranked(maps, gts, regions);
    let positives = pixels.iter().filter(|p| p.1).count();
    if positives == 0 {
        return Err(Error::AuprcUndefined);
    }
    let (mut tp, mut seen, mut area) = (0usize, 0usize, 0.0);
    let mut i = 0;
    while i < pixels.len() {
        let score = pixels[i].0;
        let mut group_tp = 0;
        while i < pixels.len() && pixels[i].0 == score {
            group_tp += usize::from(pixels[i].1);
            seen += 1;
            i += 1;
        }
        tp += group_tp;
        if group_tp > 0 {
            area += (group_tp as f64 / positives as f64) * (tp as f64 / seen as f64);
        }
    }
    Ok(area)
}

/// `n` evenly spaced thresholds from 0 to `max` inclusive (a single 0 when `max` is 0).
pub fn uniform_grid(max: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !(max >= 0.0 && max.is_finite()) {
        return Err(Error::invalid("grid needs at least one point and a finite nonnegative maximum"));
    }
    if n == 1 || max == 0.0 {
        return Ok(alloc::vec![0.0]);
    }
    Ok((0..n).map(|i| if i + 1 == n { max } else { max * i as f64 / (n - 1) as f64 }).collect())
}

/// Pooled confusion counts at each grid threshold, from one sorted pass.
fn pooled_confusions(pixels: &[(f64, bool)], grid: &[f64]) -> Vec<Confusion> {
    // prefix[k] = positives among the k highest-scoring pixels.
    let mut prefix = Vec::with_capacity(pixels.len() + 1);
    prefix.push(0usize);
    for &(_, l) in pixels {
        prefix.push(prefix.last().copied().unwrap_or(0) + usize::from(l));
    }
    let positives = prefix[pixels.len()];
    grid.iter()
        .map(|&t| {
            let k = pixels.partition_point(|p| p.0 >= t);
            let tp = prefix[k];
            Confusion { tp, fp: k - tp, fn_: positives - tp }
        })
        .collect()
}

/// Pooled Dice of every grid threshold, in grid order.
pub fn dice_curve(maps: &[AnomalyMap], gts: &[BinaryMask], regions: &[BinaryMask], grid: &[f64]) -> Result<Vec<f64>> {
    check_sets(maps, gts, regions)?;
    let pixels = ranked(maps, gts, regions);
    Ok(pooled_confusions(&pixels, grid).iter().map(Confusion::dice).collect())
}

/// The grid threshold with the highest pooled Dice; ties go to the larger threshold.
pub fn greedy_threshold(maps: &[AnomalyMap], gts: &[BinaryMask], regions: &[BinaryMask], grid: &[f64]) -> Result<f64> {
    if grid.is_empty() || grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("threshold grid must be nonempty and finite"));
    }
    let curve = dice_curve(maps, gts, regions, grid)?;
    let mut best = 0;
    for i in 1..grid.len() {
        let better = curve[i] > curve[best] || (curve[i] == curve[best] && grid[i] > grid[best]);
        if better {
            best = i;
        }
    }
    Ok(grid[best])
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyData);
        }
        let mean = crate::math::mean(values);
        let var = crate::math::mean(&values.iter().map(|v| (v - mean) * (v - mean)).collect::<Vec<_>>());
        Ok(Self { mean, std: crate::math::sqrt(var) })
    }
}

impl core::fmt::Display for MeanStd {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{:.4}±{:.4}", self.mean, self.std)
    }
}
