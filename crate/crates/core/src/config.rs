//! Unified TOML configuration. Every key has a default, so an empty file is
//! a valid configuration.
//!
//! ```toml
//! seed = 7
//!
//! [estimator]
//! smoothing_alpha = 0.4
//!
//! [scheduler]
//! min_interval_s = 900
//! duty = { medium_high = 0.75 }
//!
//! [scent.peppermint]
//! channel = 4
//! [scent.tea_tree]
//! channel = 3
//!
//! [ir.codes]
//! power = 0x00FF45BA
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::Channel;
use crate::estimator::EstimatorConfig;
use crate::features::{FeatureConfig, MIN_CALIBRATION_WINDOWS};
use crate::ir::{DeviceCommand, IrCodeTable, DEFAULT_TOLERANCE_US};
use crate::scent::{ChannelMap, ScentId};
use crate::scheduler::SchedulerConfig;
use crate::sim::SimulatorConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(e: impl ToString) -> ConfigError {
    ConfigError::Invalid(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScentOverride {
    pub channel: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IrConfig {
    /// Accepted deviation of each decoded mark/space from nominal, in µs.
    pub tolerance_us: u32,
    /// Code word overrides keyed `power`, `shutdown`, `channel_1` .. `channel_8`.
    pub codes: BTreeMap<String, u32>,
}

impl Default for IrConfig {
    fn default() -> Self {
        Self { tolerance_us: DEFAULT_TOLERANCE_US, codes: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub features: FeatureConfig,
    pub estimator: EstimatorConfig,
    pub scheduler: SchedulerConfig,
    /// Channel overrides keyed by scent (`bergamot`, `peppermint`, ...).
    pub scent: BTreeMap<String, ScentOverride>,
    pub ir: IrConfig,
    pub simulator: SimulatorConfig,
}

impl Config {
    /// Parses and validates.
    pub fn from_toml_str(text: &str) -> Result<Config, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let f = &self.features;
        let window = f.window().map_err(invalid)?;
        for (name, v) in [
            ("hr_scale_floor", f.hr_scale_floor),
            ("rmssd_scale_floor", f.rmssd_scale_floor),
            ("sdnn_scale_floor", f.sdnn_scale_floor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("features.{name} must be positive, got {v}")));
            }
        }
        let calibration = f.calibration_ms();
        let windows =
            if calibration < window.window_ms { 0 } else { (calibration - window.window_ms) / window.stride_ms + 1 };
        if (windows as usize) < MIN_CALIBRATION_WINDOWS {
            return Err(invalid(format!(
                "features.calibration_minutes = {} yields {windows} calibration windows, need {MIN_CALIBRATION_WINDOWS}",
                f.calibration_minutes
            )));
        }

        self.estimator.validate().map_err(invalid)?;
        self.scheduler.validate().map_err(invalid)?;
        self.channel_map()?;
        self.code_table()?;
        if self.ir.tolerance_us == 0 {
            return Err(invalid("ir.tolerance_us must be positive"));
        }

        let s = &self.simulator;
        if !(350.0..=1900.0).contains(&s.base_rr_ms) {
            return Err(invalid(format!("simulator.base_rr_ms must be in [350, 1900], got {}", s.base_rr_ms)));
        }
        for (name, v) in [
            ("jitter_ms", s.jitter_ms),
            ("stress_rr_drop_ms", s.stress_rr_drop_ms),
            ("fatigue_rr_rise_ms", s.fatigue_rr_rise_ms),
            ("ramp_s", s.ramp_s),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("simulator.{name} must be non-negative, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&s.stress_jitter_drop) {
            return Err(invalid(format!(
                "simulator.stress_jitter_drop must be in [0, 1], got {}",
                s.stress_jitter_drop
            )));
        }
        if !(s.hr_interval_s > 0.0 && s.hr_interval_s.is_finite()) {
            return Err(invalid(format!("simulator.hr_interval_s must be positive, got {}", s.hr_interval_s)));
        }
        Ok(())
    }

    pub fn channel_map(&self) -> Result<ChannelMap, ConfigError> {
        let mut overrides = Vec::with_capacity(self.scent.len());
        for (key, o) in &self.scent {
            let id = ScentId::parse(key).ok_or_else(|| invalid(format!("unknown scent {key:?}")))?;
            let ch = Channel::new(o.channel)
                .ok_or_else(|| invalid(format!("scent.{key}.channel must be 1..=8, got {}", o.channel)))?;
            overrides.push((id, ch));
        }
        ChannelMap::with_overrides(overrides).map_err(invalid)
    }

    pub fn code_table(&self) -> Result<IrCodeTable, ConfigError> {
        let mut overrides = Vec::with_capacity(self.ir.codes.len());
        for (key, &code) in &self.ir.codes {
            let cmd = DeviceCommand::parse(key).ok_or_else(|| invalid(format!("unknown IR command {key:?}")))?;
            overrides.push((cmd, code));
        }
        IrCodeTable::with_overrides(overrides).map_err(invalid)
    }
}
