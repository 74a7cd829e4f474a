use crate::math;
use crate::rng::rng_from;
use rand::seq::SliceRandom;

const GRAD: [(f64, f64); 12] = [
    (1.0, 1.0),
    (-1.0, 1.0),
    (1.0, -1.0),
    (-1.0, -1.0),
    (1.0, 0.0),
    (-1.0, 0.0),
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
    (0.0, 1.0),
    (0.0, -1.0),
];

/// 2-D simplex gradient noise over a seeded permutation table.
///
/// Output lies in `[-1, 1]`.
#[derive(Clone)]
pub struct Simplex2D {
    perm: [u8; 512],
}

impl core::fmt::Debug for Simplex2D {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Simplex2D").finish_non_exhaustive()
    }
}

impl Simplex2D {
    pub fn new(seed: u64) -> Self {
        let mut table = [0u8; 256];
        for (i, v) in table.iter_mut().enumerate() {
            *v = i as u8;
        }
        table.shuffle(&mut rng_from(seed));
        let mut perm = [0u8; 512];
        for i in 0..512 {
            perm[i] = table[i & 255];
        }
        Self { perm }
    }

    #[inline]
    fn corner(&self, gi: usize, x: f64, y: f64) -> f64 {
        let t = 0.5 - x * x - y * y;
        if t < 0.0 {
            0.0
        } else {
            let (gx, gy) = GRAD[gi % 12];
            let t2 = t * t;
            t2 * t2 * (gx * x + gy * y)
        }
    }

    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let sqrt3 = math::sqrt(3.0);
        let f2 = 0.5 * (sqrt3 - 1.0);
        let g2 = (3.0 - sqrt3) / 6.0;

        let s = (x + y) * f2;
        let i = math::floor(x + s);
        let j = math::floor(y + s);
        let t = (i + j) * g2;
        let x0 = x - (i - t);
        let y0 = y - (j - t);
        let (i1, j1) = if x0 > y0 { (1usize, 0usize) } else { (0, 1) };
        let x1 = x0 - i1 as f64 + g2;
        let y1 = y0 - j1 as f64 + g2;
        let x2 = x0 - 1.0 + 2.0 * g2;
        let y2 = y0 - 1.0 + 2.0 * g2;

        let ii = (i as i64 & 255) as usize;
        let jj = (j as i64 & 255) as usize;
        let p = &self.perm;
        let gi0 = p[ii + p[jj] as usize] as usize;
        let gi1 = p[ii + i1 + p[jj + j1] as usize] as usize;
        let gi2 = p[ii + 1 + p[jj + 1] as usize] as usize;

        let n = self.corner(gi0, x0, y0) + self.corner(gi1, x1, y1) + self.corner(gi2, x2, y2);
        70.0 * n
    }
}
