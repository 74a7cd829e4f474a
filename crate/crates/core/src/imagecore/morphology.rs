use super::BinaryMask;
use alloc::vec::Vec;

/// Binary erosion with the 8-connected 3×3 structuring element, applied
/// `iterations` times. Pixels outside the image count as background.
pub fn erode(mask: &BinaryMask, iterations: usize) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let mut cur = mask.clone();
    for _ in 0..iterations {
        let src = cur.bits();
        let mut next = Vec::with_capacity(src.len());
        for r in 0..h {
            for c in 0..w {
                let keep = src[r * w + c]
                    && r > 0
                    && c > 0
                    && r + 1 < h
                    && c + 1 < w
                    && (r - 1..=r + 1).all(|rr| (c - 1..=c + 1).all(|cc| src[rr * w + cc]));
                next.push(keep);
            }
        }
        cur = BinaryMask::new(w, h, next).expect("same dimensions");
        if cur.is_empty() {
            break;
        }
    }
    cur
}
