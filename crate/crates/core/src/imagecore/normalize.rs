use super::{BinaryMask, Image2D};
use crate::{Error, Result};
use alloc::vec::Vec;

/// Result of [`normalize_foreground`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub image: Image2D,
    /// Set when the foreground percentile range collapsed; the foreground is then a constant 0.5.
    pub degenerate: bool,
}

/// Linearly interpolated percentile of an ascending slice, `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = crate::math::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Maps the `lo_pct`/`hi_pct` foreground percentiles to 0/1, clamps to
/// `[0, 1]` and zeroes the background. The output carries `mask` as its
/// foreground.
pub fn normalize_foreground(img: &Image2D, mask: &BinaryMask, lo_pct: f64, hi_pct: f64) -> Result<Normalized> {
    mask.same_shape(img.width(), img.height())?;
    if !(0.0..1.0).contains(&lo_pct) || !(hi_pct > lo_pct && hi_pct <= 1.0) {
        return Err(Error::invalid("percentiles must satisfy 0 <= lo < hi <= 1"));
    }
    let mut fg: Vec<f64> = img
        .pixels()
        .iter()
        .zip(mask.bits())
        .filter_map(|(&v, &b)| b.then_some(v))
        .collect();
    if fg.is_empty() {
        return Err(Error::EmptyForeground);
    }
    fg.sort_unstable_by(f64::total_cmp);
    let lo = percentile(&fg, lo_pct);
    let hi = percentile(&fg, hi_pct);
    let span = hi - lo;
    let degenerate = !(span > f64::EPSILON * hi.abs().max(lo.abs()).max(1.0));
    let pixels = img
        .pixels()
        .iter()
        .zip(mask.bits())
        .map(|(&v, &b)| match (b, degenerate) {
            (false, _) => 0.0,
            (true, true) => 0.5,
            (true, false) => ((v - lo) / span).clamp(0.0, 1.0),
        })
        .collect();
    let image = Image2D::new(img.width(), img.height(), pixels)?.with_foreground(mask.clone())?;
    Ok(Normalized { image, degenerate })
}
