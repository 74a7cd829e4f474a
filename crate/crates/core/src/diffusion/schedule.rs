use crate::{Error, Result};
use alloc::vec::Vec;

/// Per-step noise variances with their derived products.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSchedule {
    betas: Vec<f64>,
    alphas: Vec<f64>,
    alpha_bars: Vec<f64>,
}

impl DiffusionSchedule {
    pub fn from_betas(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::invalid("schedule needs at least one step"));
        }
        if betas.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
            return Err(Error::invalid("every beta must lie in (0, 1)"));
        }
        let alphas: Vec<f64> = betas.iter().map(|b| 1.0 - b).collect();
        let mut alpha_bars = Vec::with_capacity(alphas.len());
        let mut prod = 1.0;
        for a in &alphas {
            prod *= a;
            alpha_bars.push(prod);
        }
        Ok(Self { betas, alphas, alpha_bars })
    }

    /// Number of steps `T`.
    pub fn steps(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bars
    }

    pub fn check_step(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.steps() {
            return Err(Error::StepOutOfRange { t, steps: self.steps() });
        }
        Ok(())
    }

    /// Cumulative product for 1-based step `t`.
    pub fn alpha_bar(&self, t: usize) -> Result<f64> {
        self.check_step(t)?;
        Ok(self.alpha_bars[t - 1])
    }
}

impl Default for DiffusionSchedule {
    /// Linear betas from 1e-4 to 0.02 over 1000 steps.
    fn default() -> Self {
        linear_schedule(1000, 1e-4, 0.02).expect("valid default schedule")
    }
}

/// Betas interpolated linearly from `beta_1` to `beta_t` over `steps` steps.
pub fn linear_schedule(steps: usize, beta_1: f64, beta_t: f64) -> Result<DiffusionSchedule> {
    if steps == 0 {
        return Err(Error::invalid("schedule needs at least one step"));
    }
    if !(beta_1 > 0.0 && beta_1 <= beta_t && beta_t < 1.0) {
        return Err(Error::invalid("betas must satisfy 0 < beta_1 <= beta_T < 1"));
    }
    let betas = if steps == 1 {
        alloc::vec![beta_1]
    } else {
        let span = (steps - 1) as f64;
        (0..steps)
            .map(|i| beta_1 + (beta_t - beta_1) * i as f64 / span)
            .collect()
    };
    DiffusionSchedule::from_betas(betas)
}
