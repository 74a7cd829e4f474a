//! Forward diffusion corruption and single-step reconstruction.
//!
//! Reconstruction never runs the reverse chain: the image is corrupted once at
//! a fixed step and the denoiser predicts the clean image directly. The
//! patched variant corrupts one patch at a time and keeps the rest of the
//! image clean as context.

mod noise;
mod reconstruct;
mod schedule;
mod simplex;

pub(crate) use noise::simplex_octaves as simplex_octaves_raw;
pub use noise::{forward_noise, gaussian_field, noise_field, simplex_field, NoiseField, NoiseKind, NoiseParams};
pub use reconstruct::{reconstruct_full, reconstruct_patched, Corruption, PatchSpec};
pub use schedule::{linear_schedule, DiffusionSchedule};
pub use simplex::Simplex2D;
