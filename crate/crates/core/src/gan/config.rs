use alloc::format;

use serde::{Deserialize, Serialize};

use crate::codec::NormalizationPlan;
use crate::error::{Error, Result};
use crate::kernel::AdamHyper;

/// Network, optimizer and loop settings.
///
/// Slopes and learning rate default to 0.8 (generator), 0.1 (discriminator)
/// and 1e-4. Widths, batch size and Adam betas are conventional choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GanConfig {
    pub noise_dim: usize,
    pub gen_hidden: usize,
    pub disc_hidden: usize,
    pub gen_slope: f64,
    pub disc_slope: f64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub disc_steps_per_gen_step: usize,
    pub seed: u64,
    pub normalization: NormalizationPlan,
    /// Decode categorical blocks by sampling from the softmax instead of argmax.
    pub sampled_decode: bool,
}

impl Default for GanConfig {
    fn default() -> Self {
        Self {
            noise_dim: 128,
            gen_hidden: 256,
            disc_hidden: 256,
            gen_slope: 0.8,
            disc_slope: 0.1,
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 512,
            epochs: 50,
            disc_steps_per_gen_step: 1,
            seed: 0,
            normalization: NormalizationPlan::default(),
            sampled_decode: false,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("noise_dim", self.noise_dim),
            ("gen_hidden", self.gen_hidden),
            ("disc_hidden", self.disc_hidden),
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
            ("disc_steps_per_gen_step", self.disc_steps_per_gen_step),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        for (name, s) in [("gen_slope", self.gen_slope), ("disc_slope", self.disc_slope)] {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {s}")));
            }
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::Config(format!("lr must be > 0, got {}", self.lr)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamHyper {
        AdamHyper {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = GanConfig::default();
        c.validate().unwrap();
        assert_eq!((c.gen_slope, c.disc_slope, c.lr), (0.8, 0.1, 1e-4));
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            GanConfig { batch_size: 0, ..GanConfig::default() },
            GanConfig { gen_slope: 0.0, ..GanConfig::default() },
            GanConfig { disc_slope: 1.5, ..GanConfig::default() },
            GanConfig { lr: -1.0, ..GanConfig::default() },
            GanConfig { epochs: 0, ..GanConfig::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        }
    }
}
