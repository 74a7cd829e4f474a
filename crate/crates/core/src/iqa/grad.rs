use super::fusion::FusionParams;
use super::ssim::{ssim_index, SsimParams};
use crate::imagecore::{clamp_index, window_moments, BinaryMask, Image2D};
use crate::{math, Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Adjoint of the replicate-padded box sum: every window centre scatters
/// its value to each (clamped) pixel it covers.
fn box_sum_adjoint(values: &[f64], width: usize, height: usize, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let mut cols = vec![0.0; values.len()];
    for row in 0..height {
        for col in 0..width {
            let v = values[row * width + col];
            if v == 0.0 {
                continue;
            }
            for dr in -r..=r {
                cols[clamp_index(row as isize + dr, height) * width + col] += v;
            }
        }
    }
    let mut out = vec![0.0; values.len()];
    for row in 0..height {
        for col in 0..width {
            let v = cols[row * width + col];
            for dc in -r..=r {
                out[row * width + clamp_index(col as isize + dc, width)] += v;
            }
        }
    }
    out
}

/// Fusion loss and its gradient with respect to `y`, sharing one pass of
/// window statistics. Only the closed-form SSIM configuration is supported.
pub fn fusion_loss_and_grad(
    x: &Image2D,
    y: &Image2D,
    p: &SsimParams,
    f: &FusionParams,
    mask: &BinaryMask,
) -> Result<(f64, Vec<f64>)> {
    p.validate()?;
    f.validate()?;
    if !p.is_simplified() {
        return Err(Error::invalid("loss gradient requires unit exponents and C3 = C2/2"));
    }
    mask.same_shape(x.width(), x.height())?;
    let m = window_moments(x, y, p.window)?;
    let (w, h) = (x.width(), x.height());
    let n = x.len();

    // d SSIM_k / d y_q = c_kq / N * (a_k + y_q * b_k + x_q * d_k), where c_kq
    // counts how often pixel q appears in window k after edge replication.
    let mut coef_a = vec![0.0; n];
    let mut coef_b = vec![0.0; n];
    let mut coef_d = vec![0.0; n];
    let mut ssim_vals = Vec::new();
    for i in 0..n {
        if !(mask.bits()[i] && p.is_center(i / w, i % w)) {
            continue;
        }
        let s = m.at(i);
        let ssim = ssim_index(&s, p);
        ssim_vals.push(ssim);
        let a = 2.0 * s.mean_x * s.mean_y + p.c1;
        let c = s.mean_x * s.mean_x + s.mean_y * s.mean_y + p.c1;
        let d = s.var_x + s.var_y + p.c2;
        let b = 2.0 * s.cov_xy + p.c2;
        let d_mean = 2.0 * s.mean_x * b / (c * d) - 2.0 * s.mean_y * ssim / c;
        let d_var = -ssim / d;
        let d_cov = 2.0 * a / (c * d);
        coef_a[i] = d_mean - 2.0 * s.mean_y * d_var - s.mean_x * d_cov;
        coef_b[i] = 2.0 * d_var;
        coef_d[i] = d_cov;
    }
    if ssim_vals.is_empty() {
        return Err(Error::NoWindows);
    }
    let windows = ssim_vals.len() as f64;
    let ssim_loss = ((1.0 - math::mean(&ssim_vals)) / 2.0).clamp(0.0, 1.0);

    let radius = p.window / 2;
    let adj_a = box_sum_adjoint(&coef_a, w, h, radius);
    let adj_b = box_sum_adjoint(&coef_b, w, h, radius);
    let adj_d = box_sum_adjoint(&coef_d, w, h, radius);

    let area = (p.window * p.window) as f64;
    let fg = mask.count() as f64;
    let ssim_scale = -f.alpha / (2.0 * windows * area);
    let l1_scale = (1.0 - f.alpha) / fg;
    let (xp, yp) = (x.pixels(), y.pixels());
    let mut diffs = Vec::with_capacity(mask.count());
    let mut grad = Vec::with_capacity(n);
    for q in 0..n {
        let mut g = ssim_scale * (adj_a[q] + yp[q] * adj_b[q] + xp[q] * adj_d[q]);
        if mask.bits()[q] {
            let diff = yp[q] - xp[q];
            diffs.push(diff.abs());
            if diff > 0.0 {
                g += l1_scale;
            } else if diff < 0.0 {
                g -= l1_scale;
            }
        }
        grad.push(g);
    }
    let loss = f.alpha * ssim_loss + (1.0 - f.alpha) * math::mean(&diffs);
    Ok((loss, grad))
}

/// Gradient of the fusion loss with respect to the reconstruction `y`.
/// The derivative of `|t|` at `t = 0` is taken as 0.
pub fn fusion_loss_grad(
    x: &Image2D,
    y: &Image2D,
    p: &SsimParams,
    f: &FusionParams,
    mask: &BinaryMask,
) -> Result<Vec<f64>> {
    fusion_loss_and_grad(x, y, p, f, mask).map(|(_, g)| g)
}
