use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Row-major boolean raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::invalid("mask length does not match dimensions"));
        }
        Ok(Self { width, height, bits })
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![true; width * height] }
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![false; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                bits.push(f(r, c));
            }
        }
        Self { width, height, bits }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn same_shape(&self, width: usize, height: usize) -> Result<()> {
        check_shape(width, height, self.width, self.height)
    }

    /// True when every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        other.same_shape(self.width, self.height)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a && b).collect();
        Ok(Self { width: self.width, height: self.height, bits })
    }

    pub fn not(&self) -> BinaryMask {
        let bits = self.bits.iter().map(|&b| !b).collect();
        Self { width: self.width, height: self.height, bits }
    }
}

pub(crate) fn check_shape(ew: usize, eh: usize, gw: usize, gh: usize) -> Result<()> {
    if ew != gw || eh != gh {
        return Err(Error::DimensionMismatch {
            expected_w: ew,
            expected_h: eh,
            got_w: gw,
            got_h: gh,
        });
    }
    Ok(())
}

/// Grayscale raster with an optional foreground mask.
///
/// Pixels are always finite. Without a mask every pixel counts as foreground.
#[derive(Debug, Clone, PartialEq)]
pub struct Image2D {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    foreground: Option<BinaryMask>,
}

impl Image2D {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::invalid("pixel count does not match dimensions"));
        }
        if pixels.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite pixel value"));
        }
        Ok(Self { width, height, pixels, foreground: None })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(value.is_finite());
        Self { width, height, pixels: vec![value; width * height], foreground: None }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(width, height, pixels)
    }

    /// Attaches a foreground mask of identical dimensions.
    pub fn with_foreground(mut self, mask: BinaryMask) -> Result<Self> {
        mask.same_shape(self.width, self.height)?;
        self.foreground = Some(mask);
        Ok(self)
    }

    pub fn without_foreground(mut self) -> Self {
        self.foreground = None;
        self
    }

    /// Replaces the pixels, keeping dimensions and mask.
    pub fn with_pixels(&self, pixels: Vec<f64>) -> Result<Self> {
        let img = Image2D::new(self.width, self.height, pixels)?;
        Ok(Image2D { foreground: self.foreground.clone(), ..img })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn foreground(&self) -> Option<&BinaryMask> {
        self.foreground.as_ref()
    }

    /// The foreground mask, or a full mask when none is attached.
    pub fn foreground_or_full(&self) -> BinaryMask {
        self.foreground
            .clone()
            .unwrap_or_else(|| BinaryMask::full(self.width, self.height))
    }

    #[inline]
    pub fn is_foreground(&self, index: usize) -> bool {
        self.foreground.as_ref().map_or(true, |m| m.bits[index])
    }

    pub fn same_shape(&self, other: &Image2D) -> Result<()> {
        check_shape(self.width, self.height, other.width, other.height)
    }

    /// Sets every non-foreground pixel to zero.
    pub fn zero_background(mut self) -> Self {
        if let Some(mask) = &self.foreground {
            for (p, &b) in self.pixels.iter_mut().zip(&mask.bits) {
                if !b {
                    *p = 0.0;
                }
            }
        }
        self
    }
}
