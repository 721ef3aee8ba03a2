//! Discretization of the arousal/valence plane into interaction states.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::estimator::{AvState, EstimatorConfig};
use crate::samples::ContextFlags;
use crate::{secs_to_ms, Millis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionState {
    ElevatedStressPersistent,
    ElevatedStressShort,
    Recovery,
    LowAlertness,
    MildImbalance,
    Neutral,
}

impl InteractionState {
    pub const ALL: [InteractionState; 6] = [
        InteractionState::ElevatedStressPersistent,
        InteractionState::ElevatedStressShort,
        InteractionState::Recovery,
        InteractionState::LowAlertness,
        InteractionState::MildImbalance,
        InteractionState::Neutral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InteractionState::ElevatedStressPersistent => "elevated_stress_persistent",
            InteractionState::ElevatedStressShort => "elevated_stress_short",
            InteractionState::Recovery => "recovery",
            InteractionState::LowAlertness => "low_alertness",
            InteractionState::MildImbalance => "mild_imbalance",
            InteractionState::Neutral => "neutral",
        }
    }

    pub fn is_stress(self) -> bool {
        matches!(self, InteractionState::ElevatedStressPersistent | InteractionState::ElevatedStressShort)
    }
}

impl fmt::Display for InteractionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Geometric region of the plane, independent of context and history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    Stress,
    LowArousal,
    Imbalance,
    Neutral,
}

impl Zone {
    pub fn of(av: &AvState, cfg: &EstimatorConfig) -> Zone {
        if av.arousal >= cfg.arousal_threshold && av.valence <= -cfg.valence_threshold {
            Zone::Stress
        } else if av.arousal <= -cfg.arousal_threshold {
            Zone::LowArousal
        } else if av.valence <= -cfg.mild_valence_threshold {
            Zone::Imbalance
        } else {
            Zone::Neutral
        }
    }
}

/// Tracks how long the current zone has been occupied and when the stress
/// zone was last left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersistenceTracker {
    pub current_zone: Zone,
    pub zone_entered_at: Millis,
    pub last_stress_exit_at: Option<Millis>,
}

impl Default for PersistenceTracker {
    fn default() -> Self {
        Self { current_zone: Zone::Neutral, zone_entered_at: 0, last_stress_exit_at: None }
    }
}

impl PersistenceTracker {
    fn advance(&self, zone: Zone, now: Millis) -> PersistenceTracker {
        if zone == self.current_zone {
            return *self;
        }
        PersistenceTracker {
            current_zone: zone,
            zone_entered_at: now,
            last_stress_exit_at: if self.current_zone == Zone::Stress { Some(now) } else { self.last_stress_exit_at },
        }
    }
}

/// Classifies a smoothed A/V point, evaluated at `av.timestamp`.
///
/// Rules in priority order: stress zone (persistent once occupied for
/// `persistence_s`), low arousal during long continuous work, recovery
/// within `recovery_window_s` of leaving the stress zone, mild negative
/// valence, neutral.
pub fn classify(
    av: &AvState,
    context: &ContextFlags,
    tracker: &PersistenceTracker,
    cfg: &EstimatorConfig,
) -> (InteractionState, PersistenceTracker) {
    let now = av.timestamp;
    let zone = Zone::of(av, cfg);
    let next = tracker.advance(zone, now);

    let state = if zone == Zone::Stress {
        if now.saturating_sub(next.zone_entered_at) >= secs_to_ms(cfg.persistence_s) {
            InteractionState::ElevatedStressPersistent
        } else {
            InteractionState::ElevatedStressShort
        }
    } else if av.arousal <= -cfg.arousal_threshold && context.work_minutes_continuous >= cfg.low_alertness_work_minutes
    {
        InteractionState::LowAlertness
    } else if next.last_stress_exit_at.is_some_and(|exit| now.saturating_sub(exit) <= secs_to_ms(cfg.recovery_window_s))
    {
        InteractionState::Recovery
    } else if av.valence <= -cfg.mild_valence_threshold {
        InteractionState::MildImbalance
    } else {
        InteractionState::Neutral
    };
    (state, next)
}
