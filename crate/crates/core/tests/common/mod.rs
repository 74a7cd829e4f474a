#![allow(dead_code)]

use anomap_core::{BinaryMask, Image2D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize) -> Image2D {
    Image2D::new(w, h, (0..w * h).map(|_| rng.random::<f64>()).collect()).unwrap()
}

pub fn random_mask(rng: &mut impl Rng, w: usize, h: usize, p: f64) -> BinaryMask {
    BinaryMask::new(w, h, (0..w * h).map(|_| rng.random_bool(p)).collect()).unwrap()
}

/// Replicate-padded pixel lookup.
pub fn at(img: &Image2D, r: isize, c: isize) -> f64 {
    let rr = r.clamp(0, img.height() as isize - 1) as usize;
    let cc = c.clamp(0, img.width() as isize - 1) as usize;
    img.get(rr, cc)
}

/// Two-pass window moments: (mean_x, mean_y, var_x, var_y, cov).
pub fn two_pass(x: &Image2D, y: &Image2D, row: usize, col: usize, w: usize) -> [f64; 5] {
    let r = (w / 2) as isize;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for dr in -r..=r {
        for dc in -r..=r {
            xs.push(at(x, row as isize + dr, col as isize + dc));
            ys.push(at(y, row as isize + dr, col as isize + dc));
        }
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let vx = xs.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / n;
    let vy = ys.iter().map(|v| (v - my).powi(2)).sum::<f64>() / n;
    let cv = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / n;
    [mx, my, vx, vy, cv]
}

/// Two-factor closed-form SSIM of one window.
pub fn ssim_direct(m: [f64; 5], c1: f64, c2: f64) -> f64 {
    let [mx, my, vx, vy, cv] = m;
    ((2.0 * mx * my + c1) * (2.0 * cv + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
}
