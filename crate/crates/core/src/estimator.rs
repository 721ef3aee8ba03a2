//! Arousal/valence estimation from normalized HRV features.
//!
//! The estimator is a substitution point: anything implementing
//! [`AffectEstimator`] can replace the fixed [`LinearSurrogate`] without
//! touching the classification or scheduling layers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureWindow;
use crate::Millis;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum EstimateError {
    #[error("non-finite feature {name} = {value}")]
    NonFinite { name: &'static str, value: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid estimator config: {0}")]
pub struct EstimatorConfigError(pub String);

/// Point in the arousal/valence plane, both axes clamped to `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvState {
    pub arousal: f64,
    pub valence: f64,
    pub timestamp: Millis,
}

impl AvState {
    pub fn new(arousal: f64, valence: f64, timestamp: Millis) -> Self {
        Self { arousal: arousal.clamp(-1.0, 1.0), valence: valence.clamp(-1.0, 1.0), timestamp }
    }
}

/// The `estimator` config section: surrogate weights, smoothing and the
/// zone/timing thresholds used by [`crate::state::classify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Arousal gain on heart-rate deviation.
    pub arousal_hr_weight: f64,
    /// Arousal loss per unit of RMSSD deviation.
    pub arousal_rmssd_weight: f64,
    pub valence_rmssd_weight: f64,
    pub valence_sdnn_weight: f64,
    /// Valence penalty on heart rate above baseline.
    pub valence_hr_penalty: f64,
    /// EMA gain in `(0, 1]`; 1 disables smoothing.
    pub smoothing_alpha: f64,
    pub arousal_threshold: f64,
    pub valence_threshold: f64,
    pub mild_valence_threshold: f64,
    pub persistence_s: f64,
    pub recovery_window_s: f64,
    pub low_alertness_work_minutes: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            arousal_hr_weight: 0.5,
            arousal_rmssd_weight: 0.5,
            valence_rmssd_weight: 0.4,
            valence_sdnn_weight: 0.2,
            valence_hr_penalty: 0.4,
            smoothing_alpha: 0.5,
            arousal_threshold: 0.5,
            valence_threshold: 0.3,
            mild_valence_threshold: 0.15,
            persistence_s: 300.0,
            recovery_window_s: 600.0,
            low_alertness_work_minutes: 30.0,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<(), EstimatorConfigError> {
        let err = |m: String| Err(EstimatorConfigError(m));
        for (name, w) in [
            ("arousal_hr_weight", self.arousal_hr_weight),
            ("arousal_rmssd_weight", self.arousal_rmssd_weight),
            ("valence_rmssd_weight", self.valence_rmssd_weight),
            ("valence_sdnn_weight", self.valence_sdnn_weight),
            ("valence_hr_penalty", self.valence_hr_penalty),
        ] {
            if !(w > 0.0 && w.is_finite()) {
                return err(format!("{name} must be positive, got {w}"));
            }
        }
        if !(self.smoothing_alpha > 0.0 && self.smoothing_alpha <= 1.0) {
            return err(format!("smoothing_alpha must be in (0, 1], got {}", self.smoothing_alpha));
        }
        for (name, t) in [
            ("arousal_threshold", self.arousal_threshold),
            ("valence_threshold", self.valence_threshold),
            ("mild_valence_threshold", self.mild_valence_threshold),
        ] {
            if !(t > 0.0 && t < 1.0) {
                return err(format!("{name} must be in (0, 1), got {t}"));
            }
        }
        if self.mild_valence_threshold >= self.valence_threshold {
            return err(format!(
                "mild_valence_threshold ({}) must be below valence_threshold ({})",
                self.mild_valence_threshold, self.valence_threshold
            ));
        }
        for (name, v) in [
            ("persistence_s", self.persistence_s),
            ("recovery_window_s", self.recovery_window_s),
            ("low_alertness_work_minutes", self.low_alertness_work_minutes),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return err(format!("{name} must be non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

pub trait AffectEstimator {
    fn estimate(&self, fw: &FeatureWindow) -> Result<AvState, EstimateError>;
}

/// Fixed linear map with clamping.
///
/// High heart rate with suppressed RMSSD lands in the high-arousal,
/// low-valence corner; depressed heart rate drives arousal negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSurrogate {
    pub arousal_hr: f64,
    pub arousal_rmssd: f64,
    pub valence_rmssd: f64,
    pub valence_sdnn: f64,
    pub valence_hr_penalty: f64,
}

impl From<&EstimatorConfig> for LinearSurrogate {
    fn from(cfg: &EstimatorConfig) -> Self {
        Self {
            arousal_hr: cfg.arousal_hr_weight,
            arousal_rmssd: cfg.arousal_rmssd_weight,
            valence_rmssd: cfg.valence_rmssd_weight,
            valence_sdnn: cfg.valence_sdnn_weight,
            valence_hr_penalty: cfg.valence_hr_penalty,
        }
    }
}

impl Default for LinearSurrogate {
    fn default() -> Self {
        Self::from(&EstimatorConfig::default())
    }
}

impl AffectEstimator for LinearSurrogate {
    fn estimate(&self, fw: &FeatureWindow) -> Result<AvState, EstimateError> {
        for (name, value) in [("z_hr", fw.z_hr), ("z_rmssd", fw.z_rmssd), ("z_sdnn", fw.z_sdnn)] {
            if !value.is_finite() {
                return Err(EstimateError::NonFinite { name, value });
            }
        }
        let arousal = self.arousal_hr * fw.z_hr - self.arousal_rmssd * fw.z_rmssd;
        let valence = self.valence_rmssd * fw.z_rmssd + self.valence_sdnn * fw.z_sdnn
            - self.valence_hr_penalty * fw.z_hr.max(0.0);
        Ok(AvState::new(arousal, valence, fw.window_end))
    }
}

pub fn estimate_av(fw: &FeatureWindow, cfg: &EstimatorConfig) -> Result<AvState, EstimateError> {
    LinearSurrogate::from(cfg).estimate(fw)
}

/// One EMA step per coordinate; the result carries `new`'s timestamp.
pub fn smooth_av(prev: &AvState, new: &AvState, alpha: f64) -> AvState {
    AvState {
        arousal: prev.arousal + alpha * (new.arousal - prev.arousal),
        valence: prev.valence + alpha * (new.valence - prev.valence),
        timestamp: new.timestamp,
    }
}
