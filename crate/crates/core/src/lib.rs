//! Reconstruction-based anomaly segmentation for single-channel images.
//!
//! The crate is organised around the life of one evaluation fold:
//!
//! - [`imagecore`]: rasters, masks, windowed statistics and post-processing filters.
//! - [`iqa`]: SSIM maps, the SSIM/L1 fusion loss, anomaly maps and loss gradients.
//! - [`diffusion`]: noise schedules, simplex noise, forward corruption and
//!   (patch-conditioned) single-step reconstruction.
//! - [`denoiser`]: the reconstruction-model interface and the bundled models.
//! - [`airprep`]: average intensity ratio statistics and the intensity flip.
//! - [`evalkit`]: scoring, Dice, AUPRC, threshold search and fold evaluation.
//! - [`phantom`]: deterministic synthetic brain-like datasets.
//! - [`pipeline`]: the train/evaluate fold runner behind the ablation variants.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std` feature.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

mod error;
mod math;
pub mod rng;

pub mod airprep;
pub mod denoiser;
pub mod diffusion;
pub mod evalkit;
pub mod imagecore;
pub mod iqa;
pub mod phantom;
pub mod pipeline;

pub use error::{Error, Result};
pub use imagecore::{BinaryMask, Image2D, WindowStats};
pub use iqa::AnomalyMap;
