//! Raster containers and the windowed primitives shared by the other modules.
//!
//! All windowed operations use replicate-edge padding, so outputs keep the
//! input dimensions.

mod convolve;
mod morphology;
mod normalize;
mod raster;
mod window;

pub use convolve::{gaussian_kernel, masked_convolve, Kernel1D};
pub use morphology::erode;
pub use normalize::{normalize_foreground, percentile, Normalized};
pub use raster::{BinaryMask, Image2D};
pub use window::{window_moments, window_stats, WindowMoments, WindowStats};

pub(crate) use raster::check_shape;
#[cfg(test)]
pub(crate) use window::box_sum;
pub(crate) use window::clamp_index;

use crate::iqa::AnomalyMap;
use crate::{Error, Result};
use alloc::vec::Vec;

/// Median of each `k`×`k` neighbourhood, replicate-edge padded.
pub fn median_filter(map: &AnomalyMap, k: usize) -> Result<AnomalyMap> {
    if k % 2 == 0 {
        return Err(Error::EvenKernel);
    }
    let (w, h) = (map.width(), map.height());
    let r = (k / 2) as isize;
    let src = map.scores();
    let mut out = Vec::with_capacity(src.len());
    let mut hood = Vec::with_capacity(k * k);
    for row in 0..h {
        for col in 0..w {
            hood.clear();
            for dr in -r..=r {
                let rr = clamp_index(row as isize + dr, h);
                for dc in -r..=r {
                    let cc = clamp_index(col as isize + dc, w);
                    hood.push(src[rr * w + cc]);
                }
            }
            let mid = hood.len() / 2;
            let (_, m, _) = hood.select_nth_unstable_by(mid, f64::total_cmp);
            out.push(*m);
        }
    }
    AnomalyMap::new(w, h, out)
}
