//! Sliding-window HRV features normalized against a resting baseline.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hrv::{compute_rmssd, compute_sdnn};
use crate::samples::{ContextFlags, ContextTrace, HrSample, RrSample};
use crate::{secs_to_ms, Millis};

/// Windows shorter than this give unstable RMSSD estimates.
pub const MIN_WINDOW_S: f64 = 60.0;

/// Calibration windows needed before a baseline is trusted.
pub const MIN_CALIBRATION_WINDOWS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("window length {0} s is below the {MIN_WINDOW_S} s minimum")]
    WindowTooShort(f64),
    #[error("stride must be positive, got {0} s")]
    InvalidStride(f64),
    #[error("baseline needs at least {MIN_CALIBRATION_WINDOWS} calibration windows, got {0}")]
    InsufficientCalibration(usize),
    #[error("degenerate baseline: mean {0} is not positive")]
    DegenerateBaseline(&'static str),
}

/// Feature extraction settings (the `features` config section).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub window_s: f64,
    pub stride_s: f64,
    /// Quiet period at the start of every session used for the baseline.
    pub calibration_minutes: f64,
    pub hr_scale_floor: f64,
    pub rmssd_scale_floor: f64,
    pub sdnn_scale_floor: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            window_s: 120.0,
            stride_s: 60.0,
            calibration_minutes: 5.0,
            hr_scale_floor: 3.0,
            rmssd_scale_floor: 5.0,
            sdnn_scale_floor: 5.0,
        }
    }
}

impl FeatureConfig {
    pub fn window(&self) -> Result<WindowConfig, FeatureError> {
        WindowConfig::new(self.window_s, self.stride_s)
    }

    pub fn floors(&self) -> ScaleFloors {
        ScaleFloors { hr: self.hr_scale_floor, rmssd: self.rmssd_scale_floor, sdnn: self.sdnn_scale_floor }
    }

    pub fn calibration_ms(&self) -> Millis {
        secs_to_ms(self.calibration_minutes * 60.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowConfig {
    pub window_ms: Millis,
    pub stride_ms: Millis,
}

impl WindowConfig {
    pub fn new(window_s: f64, stride_s: f64) -> Result<Self, FeatureError> {
        if window_s.is_nan() || window_s < MIN_WINDOW_S {
            return Err(FeatureError::WindowTooShort(window_s));
        }
        if stride_s.is_nan() || stride_s <= 0.0 || secs_to_ms(stride_s) == 0 {
            return Err(FeatureError::InvalidStride(stride_s));
        }
        Ok(Self { window_ms: secs_to_ms(window_s), stride_ms: secs_to_ms(stride_s) })
    }
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { window_ms: 120_000, stride_ms: 60_000 }
    }
}

/// Lower bounds for the normalization denominators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFloors {
    pub hr: f64,
    pub rmssd: f64,
    pub sdnn: f64,
}

impl Default for ScaleFloors {
    fn default() -> Self {
        FeatureConfig::default().floors()
    }
}

/// Raw per-window statistics, before baseline normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HrvWindow {
    pub window_start: Millis,
    pub window_end: Millis,
    pub rmssd: f64,
    pub sdnn: f64,
    pub mean_hr: f64,
}

/// Individual resting reference for z-normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub mean_hr: f64,
    pub mean_rmssd: f64,
    pub mean_sdnn: f64,
    pub hr_scale: f64,
    pub rmssd_scale: f64,
    pub sdnn_scale: f64,
}

/// The estimator's input vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureWindow {
    pub window_start: Millis,
    pub window_end: Millis,
    pub rmssd: f64,
    pub sdnn: f64,
    pub mean_hr: f64,
    pub z_hr: f64,
    pub z_rmssd: f64,
    pub z_sdnn: f64,
    pub context: ContextFlags,
}

impl FeatureWindow {
    pub fn normalize(w: &HrvWindow, baseline: &Baseline, context: ContextFlags) -> Self {
        Self {
            window_start: w.window_start,
            window_end: w.window_end,
            rmssd: w.rmssd,
            sdnn: w.sdnn,
            mean_hr: w.mean_hr,
            z_hr: (w.mean_hr - baseline.mean_hr) / baseline.hr_scale,
            z_rmssd: (w.rmssd - baseline.mean_rmssd) / baseline.rmssd_scale,
            z_sdnn: (w.sdnn - baseline.mean_sdnn) / baseline.sdnn_scale,
            context,
        }
    }

    pub fn hrv(&self) -> HrvWindow {
        HrvWindow {
            window_start: self.window_start,
            window_end: self.window_end,
            rmssd: self.rmssd,
            sdnn: self.sdnn,
            mean_hr: self.mean_hr,
        }
    }
}

/// Computes raw HRV statistics over `[k * stride, k * stride + window)`.
///
/// Windows are anchored at t = 0 and emitted while their end does not pass
/// the last RR timestamp. Windows holding fewer than two intervals are
/// skipped. Mean HR comes from the HR stream when it has samples inside the
/// window, otherwise from the mean RR interval.
pub fn hrv_windows(rr: &[RrSample], hr: &[HrSample], cfg: WindowConfig) -> Vec<HrvWindow> {
    let Some(last) = rr.last() else {
        return Vec::new();
    };
    let trace_end = last.timestamp;
    let rr_values: Vec<f64> = rr.iter().map(|s| s.rr).collect();

    let mut out = Vec::new();
    let mut start: Millis = 0;
    while start + cfg.window_ms <= trace_end {
        let end = start + cfg.window_ms;
        let lo = rr.partition_point(|s| s.timestamp < start);
        let hi = rr.partition_point(|s| s.timestamp < end);
        let slice = &rr_values[lo..hi];
        if let (Ok(rmssd), Ok(sdnn)) = (compute_rmssd(slice), compute_sdnn(slice)) {
            let hr_lo = hr.partition_point(|s| s.timestamp < start);
            let hr_hi = hr.partition_point(|s| s.timestamp < end);
            let mean_hr = if hr_hi > hr_lo {
                hr[hr_lo..hr_hi].iter().map(|s| s.hr).sum::<f64>() / (hr_hi - hr_lo) as f64
            } else {
                60_000.0 / (slice.iter().sum::<f64>() / slice.len() as f64)
            };
            out.push(HrvWindow { window_start: start, window_end: end, rmssd, sdnn, mean_hr });
        }
        start += cfg.stride_ms;
    }
    out
}

/// Baseline from calibration windows: means, and sample standard deviations
/// clamped from below by `floors`.
pub fn compute_baseline(calibration: &[HrvWindow], floors: ScaleFloors) -> Result<Baseline, FeatureError> {
    let n = calibration.len();
    if n < MIN_CALIBRATION_WINDOWS {
        return Err(FeatureError::InsufficientCalibration(n));
    }
    let stats = |f: fn(&HrvWindow) -> f64| {
        let mean = calibration.iter().map(f).sum::<f64>() / n as f64;
        let var = calibration.iter().map(|w| (f(w) - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, var.sqrt())
    };
    let (mean_hr, sd_hr) = stats(|w| w.mean_hr);
    let (mean_rmssd, sd_rmssd) = stats(|w| w.rmssd);
    let (mean_sdnn, sd_sdnn) = stats(|w| w.sdnn);

    for (mean, name) in [(mean_hr, "hr"), (mean_rmssd, "rmssd"), (mean_sdnn, "sdnn")] {
        if mean.is_nan() || mean <= 0.0 {
            return Err(FeatureError::DegenerateBaseline(name));
        }
    }
    Ok(Baseline {
        mean_hr,
        mean_rmssd,
        mean_sdnn,
        hr_scale: sd_hr.max(floors.hr),
        rmssd_scale: sd_rmssd.max(floors.rmssd),
        sdnn_scale: sd_sdnn.max(floors.sdnn),
    })
}

/// Full feature extraction: windows, normalization, and context at each
/// window's end.
pub fn window_features(
    rr: &[RrSample],
    hr: &[HrSample],
    context: &ContextTrace,
    baseline: &Baseline,
    cfg: WindowConfig,
) -> Vec<FeatureWindow> {
    hrv_windows(rr, hr, cfg)
        .iter()
        .map(|w| FeatureWindow::normalize(w, baseline, context.flags_at(w.window_end)))
        .collect()
}
