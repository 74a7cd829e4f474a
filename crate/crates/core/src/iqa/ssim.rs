use super::super::imagecore::{window_moments, BinaryMask, Image2D, WindowStats};
use crate::{math, Error, Result};
use alloc::vec::Vec;

/// Window geometry, stability constants and component exponents for SSIM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    /// Odd window side length in pixels.
    pub window: usize,
    /// Spacing of the window centres that enter [`ssim_loss`]. Maps are always dense.
    pub stride: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub exp_luminance: f64,
    pub exp_contrast: f64,
    pub exp_structure: f64,
}

impl Default for SsimParams {
    /// `W = 5`, `S = 1`, `C1 = (0.01)^2`, `C2 = (0.03)^2`, `C3 = C2 / 2`, unit exponents.
    fn default() -> Self {
        let c2 = 0.03f64 * 0.03;
        Self {
            window: 5,
            stride: 1,
            c1: 0.01 * 0.01,
            c2,
            c3: c2 / 2.0,
            exp_luminance: 1.0,
            exp_contrast: 1.0,
            exp_structure: 1.0,
        }
    }
}

impl SsimParams {
    /// Default parameters with a different window size.
    pub fn with_window(window: usize) -> Self {
        Self { window, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window % 2 == 0 {
            return Err(Error::invalid("SSIM window must be odd"));
        }
        if self.stride == 0 {
            return Err(Error::invalid("SSIM stride must be at least 1"));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0 && self.c3 > 0.0) {
            return Err(Error::invalid("SSIM constants must be positive"));
        }
        let exps = [self.exp_luminance, self.exp_contrast, self.exp_structure];
        if exps.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("SSIM exponents must be finite"));
        }
        Ok(())
    }

    /// Unit exponents with `C3 = C2 / 2`, where the three-term product
    /// collapses to the two-factor closed form.
    pub fn is_simplified(&self) -> bool {
        self.exp_luminance == 1.0
            && self.exp_contrast == 1.0
            && self.exp_structure == 1.0
            && self.c3 == self.c2 / 2.0
    }

    pub(crate) fn is_center(&self, row: usize, col: usize) -> bool {
        row % self.stride == 0 && col % self.stride == 0
    }
}

/// Sign-preserving power so negative structure terms stay finite.
fn spow(base: f64, e: f64) -> f64 {
    if e == 1.0 {
        base
    } else if base < 0.0 {
        -math::powf(-base, e)
    } else {
        math::powf(base, e)
    }
}

/// SSIM of one window from its statistics.
pub fn ssim_index(s: &WindowStats, p: &SsimParams) -> f64 {
    if p.is_simplified() {
        let num = (2.0 * s.mean_x * s.mean_y + p.c1) * (2.0 * s.cov_xy + p.c2);
        let den = (s.mean_x * s.mean_x + s.mean_y * s.mean_y + p.c1) * (s.var_x + s.var_y + p.c2);
        return num / den;
    }
    let (sx, sy) = (math::sqrt(s.var_x), math::sqrt(s.var_y));
    let l = (2.0 * s.mean_x * s.mean_y + p.c1) / (s.mean_x * s.mean_x + s.mean_y * s.mean_y + p.c1);
    let c = (2.0 * sx * sy + p.c2) / (s.var_x + s.var_y + p.c2);
    let st = (s.cov_xy + p.c3) / (sx * sy + p.c3);
    spow(l, p.exp_luminance) * spow(c, p.exp_contrast) * spow(st, p.exp_structure)
}

/// Dense per-pixel SSIM values in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

/// SSIM of the window centred on every pixel.
pub fn ssim_map(x: &Image2D, y: &Image2D, p: &SsimParams) -> Result<SsimMap> {
    p.validate()?;
    let m = window_moments(x, y, p.window)?;
    let values = (0..x.len()).map(|i| ssim_index(&m.at(i), p)).collect();
    Ok(SsimMap { width: x.width(), height: x.height(), values })
}

/// `(1 - mean SSIM) / 2` over the window centres selected by `mask` and the stride.
pub fn ssim_loss(x: &Image2D, y: &Image2D, p: &SsimParams, mask: &BinaryMask) -> Result<f64> {
    mask.same_shape(x.width(), x.height())?;
    let map = ssim_map(x, y, p)?;
    let w = map.width;
    let selected: Vec<f64> = map
        .values
        .iter()
        .enumerate()
        .filter(|&(i, _)| mask.bits()[i] && p.is_center(i / w, i % w))
        .map(|(_, &v)| v)
        .collect();
    if selected.is_empty() {
        return Err(Error::NoWindows);
    }
    Ok(((1.0 - math::mean(&selected)) / 2.0).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::window_stats;

    fn textured(seed: u32) -> Image2D {
        Image2D::from_fn(12, 10, |r, c| {
            let v = ((r as f64 * 1.7 + c as f64 * 0.9 + seed as f64).sin() + 1.0) / 2.0;
            (v * 0.9 + 0.05).clamp(0.0, 1.0)
        })
        .unwrap()
    }

    #[test]
    fn identical_images_score_exactly_one() {
        let x = textured(1);
        let m = ssim_map(&x, &x, &SsimParams::default()).unwrap();
        assert!(m.values.iter().all(|&v| v == 1.0));
        let full = BinaryMask::full(12, 10);
        assert_eq!(ssim_loss(&x, &x, &SsimParams::default(), &full).unwrap(), 0.0);
    }

    #[test]
    fn constant_black_vs_white_closed_form() {
        let x = Image2D::filled(8, 8, 0.0);
        let y = Image2D::filled(8, 8, 1.0);
        let p = SsimParams::default();
        let expect = p.c1 * p.c2 / ((1.0 + p.c1) * p.c2);
        let m = ssim_map(&x, &y, &p).unwrap();
        assert!(m.values.iter().all(|&v| (v - expect).abs() < 1e-12));
        let loss = ssim_loss(&x, &y, &p, &BinaryMask::full(8, 8)).unwrap();
        assert!((loss - (1.0 - expect) / 2.0).abs() < 1e-12);
        assert!((loss - 0.49995).abs() < 1e-6);
    }

    fn three_term(s: &WindowStats, c1: f64, c2: f64, c3: f64) -> f64 {
        let (sx, sy) = (s.var_x.sqrt(), s.var_y.sqrt());
        let l = (2.0 * s.mean_x * s.mean_y + c1) / (s.mean_x.powi(2) + s.mean_y.powi(2) + c1);
        let c = (2.0 * sx * sy + c2) / (s.var_x + s.var_y + c2);
        let st = (s.cov_xy + c3) / (sx * sy + c3);
        l * c * st
    }

    #[test]
    fn three_term_product_collapses_to_closed_form() {
        let (x, y) = (textured(2), textured(5));
        let p = SsimParams::default();
        assert!(p.is_simplified());
        for row in 0..10 {
            for col in 0..12 {
                let s = window_stats(&x, &y, row, col, 5).unwrap();
                assert!((three_term(&s, p.c1, p.c2, p.c3) - ssim_index(&s, &p)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn general_path_uses_c3() {
        let (x, y) = (textured(2), textured(7));
        let p = SsimParams { c3: 2e-4, ..SsimParams::default() };
        assert!(!p.is_simplified());
        let s = window_stats(&x, &y, 4, 4, 5).unwrap();
        assert!((three_term(&s, p.c1, p.c2, 2e-4) - ssim_index(&s, &p)).abs() < 1e-14);
    }

    #[test]
    fn empty_mask_has_no_windows() {
        let x = textured(0);
        let err = ssim_loss(&x, &x, &SsimParams::default(), &BinaryMask::empty(12, 10)).unwrap_err();
        assert_eq!(err.to_string(), "no windows");
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let x = Image2D::filled(4, 4, 0.1);
        let y = Image2D::filled(4, 5, 0.1);
        assert!(matches!(ssim_map(&x, &y, &SsimParams::default()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn stride_selects_lattice_centres() {
        let (x, y) = (textured(3), textured(4));
        let p = SsimParams { stride: 2, ..SsimParams::default() };
        let map = ssim_map(&x, &y, &p).unwrap();
        let mut acc = 0.0;
        let mut n = 0.0;
        for r in (0..10).step_by(2) {
            for c in (0..12).step_by(2) {
                acc += map.values[r * 12 + c];
                n += 1.0;
            }
        }
        let loss = ssim_loss(&x, &y, &p, &BinaryMask::full(12, 10)).unwrap();
        assert!((loss - (1.0 - acc / n) / 2.0).abs() < 1e-12);
    }
}
