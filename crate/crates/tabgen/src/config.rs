//! Run configuration file: `gan`, `schedule` and `evaluation` sections.
//! Command-line flags override file values, which override defaults.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tabgen_core::gan::{build_schedule, build_schedule_with_ratio, GanConfig, GenerationMode, GenerationSchedule};
use tabgen_core::metrics::EvalOptions;

use crate::error::{require_input, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub mode: GenerationMode,
    /// First percentage `a` of the geometric schedule.
    pub first_item: f64,
    /// Percentage total `S`.
    pub total: f64,
    /// Use this common ratio instead of solving for it.
    pub ratio_override: Option<f64>,
    /// Synthetic rows to emit; `None` means as many as the real table.
    pub synthetic_count: Option<usize>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            mode: GenerationMode::Geometric,
            first_item: 0.2,
            total: 100.0,
            ratio_override: None,
            synthetic_count: None,
        }
    }
}

impl ScheduleConfig {
    pub fn build(&self, epochs: usize, real_rows: usize) -> tabgen_core::Result<GenerationSchedule> {
        let n = self.synthetic_count.unwrap_or(real_rows);
        match (self.mode, self.ratio_override) {
            (GenerationMode::Geometric, Some(r)) => build_schedule_with_ratio(n, epochs, self.first_item, r),
            (mode, _) => build_schedule(mode, n, epochs, self.first_item, self.total),
        }
    }
}

/// Dataset preparation recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    Olympic,
    Census,
    /// Load and missing-token handling only.
    #[default]
    Generic,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub recipe: Recipe,
    /// Replaces `gan.seed` when set.
    pub seed: Option<u64>,
    pub gan: GanConfig,
    pub schedule: ScheduleConfig,
    pub evaluation: EvalOptions,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        require_input(path)?;
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    /// GAN settings with the top-level seed applied.
    pub fn effective_gan(&self) -> GanConfig {
        GanConfig {
            seed: self.seed.unwrap_or(self.gan.seed),
            ..self.gan.clone()
        }
    }

    /// File contents when a path is given, defaults otherwise.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}
