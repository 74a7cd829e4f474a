//! Deterministic synthetic brain-like phantoms.
//!
//! A phantom is an elliptical "brain" foreground filled with a textured
//! normal intensity. Abnormal phantoms add one to three soft-edged blob
//! lesions filled toward the lesion intensity of the modality profile.

use crate::imagecore::{erode, BinaryMask, Image2D};
use crate::rng::{derive_seed, rng_from, stream};
use crate::{math, Error, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use rand::Rng;

/// Erosion depth that lesions must clear, matching the evaluation post-processing.
const LESION_MARGIN_EROSION: usize = 3;
const PLACEMENT_ATTEMPTS: usize = 100;
const INTENSITY_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProfileKind {
    T2Like,
    FlairLike,
    T1ceLike,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 3] = [ProfileKind::T2Like, ProfileKind::FlairLike, ProfileKind::T1ceLike];

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::T2Like => "t2_like",
            ProfileKind::FlairLike => "flair_like",
            ProfileKind::T1ceLike => "t1ce_like",
        }
    }

    /// Inference corruption step: 500 for T2-like data, 750 otherwise.
    pub fn default_t_test(self) -> usize {
        match self {
            ProfileKind::T2Like => 500,
            _ => 750,
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProfileKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown profile '{s}'")))
    }
}

/// Intensity and lesion statistics of a synthetic modality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalityProfile {
    pub kind: ProfileKind,
    pub mu_normal: f64,
    pub mu_lesion: f64,
    /// Peak deviation of the normal-tissue texture from `mu_normal`.
    pub texture_amp: f64,
    /// Inclusive lesion radius range in pixels.
    pub lesion_radius: (f64, f64),
    /// Inclusive lesion count range.
    pub lesion_count: (usize, usize),
}

impl ModalityProfile {
    pub fn t2_like() -> Self {
        Self::with_means(ProfileKind::T2Like, 0.30, 0.42)
    }

    pub fn flair_like() -> Self {
        Self::with_means(ProfileKind::FlairLike, 0.58, 0.78)
    }

    pub fn t1ce_like() -> Self {
        Self::with_means(ProfileKind::T1ceLike, 0.55, 0.70)
    }

    fn with_means(kind: ProfileKind, mu_normal: f64, mu_lesion: f64) -> Self {
        Self { kind, mu_normal, mu_lesion, texture_amp: 0.06, lesion_radius: (3.0, 6.0), lesion_count: (1, 3) }
    }

    pub fn for_kind(kind: ProfileKind) -> Self {
        match kind {
            ProfileKind::T2Like => Self::t2_like(),
            ProfileKind::FlairLike => Self::flair_like(),
            ProfileKind::T1ceLike => Self::t1ce_like(),
        }
    }

    /// Same profile with the lesion mean set to `mu_normal + gap`.
    pub fn with_lesion_gap(mut self, gap: f64) -> Self {
        self.mu_lesion = self.mu_normal + gap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !unit(self.mu_normal) || !unit(self.mu_lesion) {
            return Err(Error::invalid("profile means must lie in (0, 1)"));
        }
        if !(self.texture_amp >= 0.0 && self.texture_amp < 0.5) {
            return Err(Error::invalid("texture amplitude must lie in [0, 0.5)"));
        }
        let (r0, r1) = self.lesion_radius;
        if !(r0 > 0.0 && r0 <= r1 && r1.is_finite()) {
            return Err(Error::invalid("lesion radius range must be positive and ordered"));
        }
        let (n0, n1) = self.lesion_count;
        if n0 == 0 || n0 > n1 {
            return Err(Error::invalid("lesion count range must be positive and ordered"));
        }
        Ok(())
    }

    /// Whether the means satisfy the intensity prior of the profile kind:
    /// T2-like lesions are darker than 0.5 but brighter than normal tissue;
    /// FLAIR/T1-CE-like normal tissue is brighter than 0.5 with brighter lesions.
    pub fn satisfies_prior(&self) -> bool {
        match self.kind {
            ProfileKind::T2Like => self.mu_normal < self.mu_lesion && self.mu_lesion < 0.5,
            _ => self.mu_normal > 0.5 && self.mu_lesion > self.mu_normal,
        }
    }
}

/// An image with its brain mask, anomaly ground truth and modality tag.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub id: String,
    pub image: Image2D,
    pub foreground: BinaryMask,
    pub anomaly_gt: BinaryMask,
    pub profile: ProfileKind,
}

impl LabeledSample {
    pub fn is_healthy(&self) -> bool {
        self.anomaly_gt.is_empty()
    }

    /// Checks mask shapes and `anomaly_gt ⊆ foreground`.
    pub fn validate(&self) -> Result<()> {
        self.foreground.same_shape(self.image.width(), self.image.height())?;
        self.anomaly_gt.same_shape(self.image.width(), self.image.height())?;
        if !self.anomaly_gt.is_subset_of(&self.foreground) {
            return Err(Error::invalid(format!("{}: anomaly mask leaves the foreground", self.id)));
        }
        Ok(())
    }
}

/// Healthy and unhealthy splits with disjoint identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomDataset {
    pub train: Vec<LabeledSample>,
    pub val: Vec<LabeledSample>,
    pub test: Vec<LabeledSample>,
}

fn check_size(size: usize) -> Result<()> {
    if size < 32 {
        return Err(Error::invalid("phantom size must be at least 32"));
    }
    Ok(())
}

fn texture(seed: u64, size: usize, mask: &BinaryMask, amp: f64) -> Vec<f64> {
    if amp == 0.0 {
        return alloc::vec![0.0; size * size];
    }
    let raw = crate::diffusion::simplex_octaves_raw(seed, size, size, 3, 0.5, size as f64 / 2.0);
    let fg: Vec<f64> = raw.iter().zip(mask.bits()).filter_map(|(&v, &m)| m.then_some(v)).collect();
    let mean = math::mean(&fg);
    let peak = fg.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if peak == 0.0 {
        return alloc::vec![0.0; size * size];
    }
    raw.iter().map(|v| amp * (v - mean) / peak).collect()
}

/// A lesion-free phantom: jittered ellipse filled with textured `mu_normal`.
pub fn gen_healthy(seed: u64, size: usize, profile: &ModalityProfile) -> Result<LabeledSample> {
    check_size(size)?;
    profile.validate()?;
    let mut rng = rng_from(derive_seed(seed, stream::TEXTURE, 0));
    let s = size as f64;
    let cx = s / 2.0 - 0.5 + rng.random_range(-0.03..=0.03) * s;
    let cy = s / 2.0 - 0.5 + rng.random_range(-0.03..=0.03) * s;
    let ax = rng.random_range(0.35..=0.45) * s;
    let ay = rng.random_range(0.35..=0.45) * s;
    let foreground = BinaryMask::from_fn(size, size, |r, c| {
        let (dx, dy) = ((c as f64 - cx) / ax, (r as f64 - cy) / ay);
        dx * dx + dy * dy <= 1.0
    });
    let tex = texture(derive_seed(seed, stream::TEXTURE, 1), size, &foreground, profile.texture_amp);
    let pixels = tex
        .iter()
        .zip(foreground.bits())
        .map(|(&t, &m)| {
            if !m {
                0.0
            } else if t == 0.0 {
                profile.mu_normal
            } else {
                (profile.mu_normal + t).clamp(INTENSITY_FLOOR, 1.0 - INTENSITY_FLOOR)
            }
        })
        .collect();
    let image = Image2D::new(size, size, pixels)?.with_foreground(foreground.clone())?;
    Ok(LabeledSample {
        id: format!("{seed}"),
        image,
        anomaly_gt: BinaryMask::empty(size, size),
        foreground,
        profile: profile.kind,
    })
}

#[derive(Debug, Clone, Copy)]
struct Disk {
    cx: f64,
    cy: f64,
    r: f64,
}

impl Disk {
    /// Linear ramp over two pixels: 1 inside `r - 1`, 0.5 at `r`, 0 beyond `r + 1`.
    fn weight(&self, row: usize, col: usize) -> f64 {
        let (dx, dy) = (col as f64 - self.cx, row as f64 - self.cy);
        let d = math::sqrt(dx * dx + dy * dy);
        ((self.r - d) / 2.0 + 0.5).clamp(0.0, 1.0)
    }

    fn support_inside(&self, allowed: &BinaryMask) -> bool {
        let reach = self.r + 1.0;
        let (h, w) = (allowed.height() as f64, allowed.width() as f64);
        let r0 = math::floor(self.cy - reach);
        let r1 = math::ceil(self.cy + reach);
        let c0 = math::floor(self.cx - reach);
        let c1 = math::ceil(self.cx + reach);
        if r0 < 0.0 || c0 < 0.0 || r1 >= h || c1 >= w {
            return false;
        }
        for r in r0 as usize..=r1 as usize {
            for c in c0 as usize..=c1 as usize {
                if self.weight(r, c) > 0.0 && !allowed.get(r, c) {
                    return false;
                }
            }
        }
        true
    }
}

/// One lesion: a primary disk plus up to two jittered satellite disks near its centre.
fn place_lesion(rng: &mut impl Rng, allowed: &BinaryMask, radius: (f64, f64)) -> Result<Vec<Disk>> {
    let cells: Vec<(usize, usize)> = (0..allowed.height())
        .flat_map(|r| (0..allowed.width()).map(move |c| (r, c)))
        .filter(|&(r, c)| allowed.get(r, c))
        .collect();
    if cells.is_empty() {
        return Err(Error::LesionPlacement);
    }
    for _ in 0..PLACEMENT_ATTEMPTS {
        let (row, col) = cells[rng.random_range(0..cells.len())];
        let r = if radius.0 == radius.1 { radius.0 } else { rng.random_range(radius.0..=radius.1) };
        let mut disks = alloc::vec![Disk { cx: col as f64, cy: row as f64, r }];
        let satellites = rng.random_range(0..=2usize);
        for _ in 0..satellites {
            let theta = rng.random_range(0.0..core::f64::consts::TAU);
            let dist = r * rng.random_range(0.0..=0.25);
            disks.push(Disk {
                cx: col as f64 + dist * math::cos(theta),
                cy: row as f64 + dist * math::sin(theta),
                r: r * rng.random_range(0.5..=0.8),
            });
        }
        if disks.iter().all(|d| d.support_inside(allowed)) {
            return Ok(disks);
        }
    }
    Err(Error::LesionPlacement)
}

/// A healthy phantom with blob lesions blended toward `mu_lesion`.
/// Ground truth marks pixels whose blend weight exceeds one half.
pub fn gen_abnormal(seed: u64, size: usize, profile: &ModalityProfile) -> Result<LabeledSample> {
    let base = gen_healthy(seed, size, profile)?;
    let allowed = erode(&base.foreground, LESION_MARGIN_EROSION);
    let mut rng = rng_from(derive_seed(seed, stream::LESION, 0));
    let (n0, n1) = profile.lesion_count;
    let count = if n0 == n1 { n0 } else { rng.random_range(n0..=n1) };
    let mut disks = Vec::new();
    for _ in 0..count {
        disks.extend(place_lesion(&mut rng, &allowed, profile.lesion_radius)?);
    }
    let mut weights = alloc::vec![0.0f64; size * size];
    for r in 0..size {
        for c in 0..size {
            weights[r * size + c] = disks.iter().map(|d| d.weight(r, c)).fold(0.0, f64::max);
        }
    }
    let pixels = base
        .image
        .pixels()
        .iter()
        .zip(&weights)
        .map(|(&v, &w)| if w > 0.0 { (1.0 - w) * v + w * profile.mu_lesion } else { v })
        .collect();
    let anomaly_gt = BinaryMask::new(size, size, weights.iter().map(|&w| w > 0.5).collect())?;
    Ok(LabeledSample { image: base.image.with_pixels(pixels)?, anomaly_gt, ..base })
}

/// Healthy training split plus unhealthy validation and test splits.
pub fn gen_dataset(
    seed: u64,
    size: usize,
    profile: &ModalityProfile,
    n_train_healthy: usize,
    n_val_abnormal: usize,
    n_test_abnormal: usize,
) -> Result<PhantomDataset> {
    if n_train_healthy == 0 || n_val_abnormal == 0 || n_test_abnormal == 0 {
        return Err(Error::invalid("every split needs at least one sample"));
    }
    let split = |tag: &str, n: usize, s: u64, abnormal: bool| -> Result<Vec<LabeledSample>> {
        (0..n)
            .map(|i| {
                let sample_seed = derive_seed(seed, s, i as u64);
                let mut sample = if abnormal {
                    gen_abnormal(sample_seed, size, profile)?
                } else {
                    gen_healthy(sample_seed, size, profile)?
                };
                sample.id = format!("{tag}-{i:04}");
                Ok(sample)
            })
            .collect()
    };
    Ok(PhantomDataset {
        train: split("train", n_train_healthy, stream::PHANTOM_TRAIN, false)?,
        val: split("val", n_val_abnormal, stream::PHANTOM_VAL, true)?,
        test: split("test", n_test_abnormal, stream::PHANTOM_TEST, true)?,
    })
}
