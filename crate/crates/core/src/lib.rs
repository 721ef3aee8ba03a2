//! Core engine for HRV-driven olfactory actuation.
//!
//! The pipeline runs in two stages. Physiological samples are cleaned,
//! windowed into RMSSD/SDNN/heart-rate features and projected onto a
//! smoothed arousal/valence coordinate ([`estimator`]), which is then
//! discretized into an [`InteractionState`]. A rule layer maps each state to
//! a scent expression ([`scent`]), the [`scheduler`] enforces the actuation
//! constraints, and [`ir`] turns the resulting releases into infrared frames
//! for the atomizer board. [`sim`] generates synthetic sessions and replays
//! traces through the whole pipeline as a deterministic event loop.

pub mod channel;
pub mod config;
pub mod error;
pub mod estimator;
pub mod features;
pub mod hrv;
pub mod ir;
pub mod samples;
pub mod scent;
pub mod scheduler;
pub mod sim;
pub mod state;

pub use channel::Channel;
pub use config::{Config, ConfigError};
pub use error::Error;
pub use estimator::{AffectEstimator, AvState, EstimatorConfig, LinearSurrogate};
pub use features::{Baseline, FeatureWindow, HrvWindow, WindowConfig};
pub use ir::{DeviceCommand, IrCodeTable, IrFrame};
pub use samples::{ActivityState, ContextFlags, ContextSample, ContextTrace, HrSample, RrSample};
pub use scent::{Intensity, Profile, Rhythm, ScentExpression, ScentId, SelectionHistory};
pub use scheduler::{Decision, ReleaseCommand, Scheduler, SchedulerConfig, SuppressReason};
pub use state::{InteractionState, PersistenceTracker};

/// Milliseconds since session start.
pub type Millis = u64;

/// Converts a duration in (possibly fractional) seconds to whole milliseconds.
pub fn secs_to_ms(secs: f64) -> Millis {
    (secs * 1000.0).round().max(0.0) as Millis
}
