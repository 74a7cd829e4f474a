use super::raster::check_shape;
use super::Image2D;
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// First and second moments of a pair of images over one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
}

#[inline]
pub(crate) fn clamp_index(i: isize, len: usize) -> usize {
    if i < 0 {
        0
    } else if i as usize >= len {
        len - 1
    } else {
        i as usize
    }
}

fn check_window(window: usize) -> Result<()> {
    if window % 2 == 0 {
        return Err(Error::invalid("window size must be odd"));
    }
    Ok(())
}

/// Uniform-weight statistics over the `window`×`window` neighbourhood of
/// `(row, col)` with replicate-edge padding. Variances are population
/// variances, clamped at zero.
pub fn window_stats(x: &Image2D, y: &Image2D, row: usize, col: usize, window: usize) -> Result<WindowStats> {
    x.same_shape(y)?;
    check_window(window)?;
    let (w, h) = (x.width(), x.height());
    let r = (window / 2) as isize;
    let (xp, yp) = (x.pixels(), y.pixels());
    let n = (window * window) as f64;
    let index = |dr: isize, dc: isize| clamp_index(row as isize + dr, h) * w + clamp_index(col as isize + dc, w);
    let (mut sx, mut sy) = (0.0, 0.0);
    for dr in -r..=r {
        for dc in -r..=r {
            let i = index(dr, dc);
            sx += xp[i];
            sy += yp[i];
        }
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for dr in -r..=r {
        for dc in -r..=r {
            let i = index(dr, dc);
            let (a, b) = (xp[i] - mx, yp[i] - my);
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
        }
    }
    let (var_x, var_y) = (sxx / n, syy / n);
    Ok(WindowStats { mean_x: mx, mean_y: my, var_x, var_y, cov_xy: bound_cov(sxy / n, var_x, var_y) })
}

/// Keeps rounding from pushing the covariance past the Cauchy-Schwarz bound.
#[inline]
fn bound_cov(cov: f64, var_x: f64, var_y: f64) -> f64 {
    let b = crate::math::sqrt(var_x * var_y);
    cov.clamp(-b, b)
}

#[inline]
fn finish(mx: f64, my: f64, exx: f64, eyy: f64, exy: f64) -> WindowStats {
    let var_x = (exx - mx * mx).max(0.0);
    let var_y = (eyy - my * my).max(0.0);
    WindowStats { mean_x: mx, mean_y: my, var_x, var_y, cov_xy: bound_cov(exy - mx * my, var_x, var_y) }
}

/// Per-pixel window statistics for every window centre of an image pair.
#[derive(Debug, Clone)]
pub struct WindowMoments {
    pub width: usize,
    pub height: usize,
    pub window: usize,
    pub mean_x: Vec<f64>,
    pub mean_y: Vec<f64>,
    pub var_x: Vec<f64>,
    pub var_y: Vec<f64>,
    pub cov_xy: Vec<f64>,
}

impl WindowMoments {
    pub fn at(&self, index: usize) -> WindowStats {
        WindowStats {
            mean_x: self.mean_x[index],
            mean_y: self.mean_y[index],
            var_x: self.var_x[index],
            var_y: self.var_y[index],
            cov_xy: self.cov_xy[index],
        }
    }
}

/// Replicate-padded box sum of radius `radius`, computed separably.
pub(crate) fn box_sum(values: &[f64], width: usize, height: usize, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let mut rows = vec![0.0; values.len()];
    for row in 0..height {
        let line = &values[row * width..(row + 1) * width];
        for col in 0..width {
            let mut acc = 0.0;
            for dc in -r..=r {
                acc += line[clamp_index(col as isize + dc, width)];
            }
            rows[row * width + col] = acc;
        }
    }
    let mut out = vec![0.0; values.len()];
    for row in 0..height {
        for col in 0..width {
            let mut acc = 0.0;
            for dr in -r..=r {
                acc += rows[clamp_index(row as isize + dr, height) * width + col];
            }
            out[row * width + col] = acc;
        }
    }
    out
}

/// [`window_stats`] for every pixel at once, via separable box sums.
pub fn window_moments(x: &Image2D, y: &Image2D, window: usize) -> Result<WindowMoments> {
    check_shape(x.width(), x.height(), y.width(), y.height())?;
    check_window(window)?;
    let (w, h) = (x.width(), x.height());
    let r = window / 2;
    let (xp, yp) = (x.pixels(), y.pixels());
    let n = (window * window) as f64;
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).collect::<Vec<_>>();
    let sx = box_sum(xp, w, h, r);
    let sy = box_sum(yp, w, h, r);
    let sxx = box_sum(&sq(xp, xp), w, h, r);
    let syy = box_sum(&sq(yp, yp), w, h, r);
    let sxy = box_sum(&sq(xp, yp), w, h, r);
    let len = xp.len();
    let mut m = WindowMoments {
        width: w,
        height: h,
        window,
        mean_x: Vec::with_capacity(len),
        mean_y: Vec::with_capacity(len),
        var_x: Vec::with_capacity(len),
        var_y: Vec::with_capacity(len),
        cov_xy: Vec::with_capacity(len),
    };
    for i in 0..len {
        let s = finish(sx[i] / n, sy[i] / n, sxx[i] / n, syy[i] / n, sxy[i] / n);
        m.mean_x.push(s.mean_x);
        m.mean_y.push(s.mean_y);
        m.var_x.push(s.var_x);
        m.var_y.push(s.var_y);
        m.cov_xy.push(s.cov_xy);
    }
    Ok(m)
}
