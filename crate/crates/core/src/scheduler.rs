//! Release scheduling under the actuation constraints.
//!
//! At most one channel is active at any instant, a new release may only start
//! once `min_interval_s` has elapsed since the previous release *ended*
//! (boundary inclusive), and no burst lasts longer than `max_burst_s`.
//! Suppressed requests are dropped; only rhythm-driven repeats are queued.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::Channel;
use crate::scent::{Intensity, Rhythm, ScentExpression, ScentId};
use crate::state::InteractionState;
use crate::{secs_to_ms, Millis};

/// Hard ceiling on any configured burst.
pub const MAX_BURST_CEILING_S: f64 = 30.0;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid scheduler config: {0}")]
pub struct SchedulerConfigError(pub String);

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum TickError {
    #[error("time went backwards: tick at {now} after {previous}")]
    TimeRegression { now: Millis, previous: Millis },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DutyMap {
    pub low: f64,
    pub low_medium: f64,
    pub medium: f64,
    pub medium_high: f64,
}

impl Default for DutyMap {
    fn default() -> Self {
        Self { low: 0.30, low_medium: 0.45, medium: 0.60, medium_high: 0.80 }
    }
}

impl DutyMap {
    pub fn get(&self, intensity: Intensity) -> f64 {
        match intensity {
            Intensity::Low => self.low,
            Intensity::LowMedium => self.low_medium,
            Intensity::Medium => self.medium,
            Intensity::MediumHigh => self.medium_high,
        }
    }
}

/// Burst length per rhythm, in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BurstMap {
    pub single_brief: f64,
    pub repeated_low_frequency: f64,
    pub brief_repeat_if_needed: f64,
}

impl Default for BurstMap {
    fn default() -> Self {
        Self { single_brief: 8.0, repeated_low_frequency: 12.0, brief_repeat_if_needed: 8.0 }
    }
}

impl BurstMap {
    pub fn get(&self, rhythm: Rhythm) -> f64 {
        match rhythm {
            Rhythm::SingleBrief => self.single_brief,
            Rhythm::RepeatedLowFrequency => self.repeated_low_frequency,
            Rhythm::BriefRepeatIfNeeded => self.brief_repeat_if_needed,
        }
    }
}

/// The `scheduler` config section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerConfig {
    pub min_interval_s: f64,
    pub max_burst_s: f64,
    /// How late after its due time a queued repeat may still fire.
    pub repeat_check_horizon_s: f64,
    pub duty: DutyMap,
    pub burst_s: BurstMap,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            min_interval_s: 900.0,
            max_burst_s: 30.0,
            repeat_check_horizon_s: 120.0,
            duty: DutyMap::default(),
            burst_s: BurstMap::default(),
        }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<(), SchedulerConfigError> {
        let err = |m: String| Err(SchedulerConfigError(m));
        if !(self.min_interval_s > 0.0 && self.min_interval_s.is_finite()) {
            return err(format!("min_interval_s must be positive, got {}", self.min_interval_s));
        }
        if !(self.max_burst_s > 0.0 && self.max_burst_s <= MAX_BURST_CEILING_S) {
            return err(format!("max_burst_s must be in (0, {MAX_BURST_CEILING_S}], got {}", self.max_burst_s));
        }
        if !(self.repeat_check_horizon_s >= 0.0 && self.repeat_check_horizon_s.is_finite()) {
            return err(format!("repeat_check_horizon_s must be non-negative, got {}", self.repeat_check_horizon_s));
        }
        let d = &self.duty;
        for (name, v) in
            [("low", d.low), ("low_medium", d.low_medium), ("medium", d.medium), ("medium_high", d.medium_high)]
        {
            if !(v > 0.0 && v <= 1.0) {
                return err(format!("duty.{name} must be in (0, 1], got {v}"));
            }
        }
        let b = &self.burst_s;
        for (name, v) in [
            ("single_brief", b.single_brief),
            ("repeated_low_frequency", b.repeated_low_frequency),
            ("brief_repeat_if_needed", b.brief_repeat_if_needed),
        ] {
            if !(v > 0.0 && v <= self.max_burst_s) {
                return err(format!("burst_s.{name} must be in (0, max_burst_s], got {v}"));
            }
        }
        Ok(())
    }

    pub fn min_interval_ms(&self) -> Millis {
        secs_to_ms(self.min_interval_s)
    }

    pub fn max_burst_ms(&self) -> Millis {
        secs_to_ms(self.max_burst_s)
    }
}

/// A concrete actuation: run `channel` at `duty` for `duration_ms`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReleaseCommand {
    pub start: Millis,
    pub channel: Channel,
    pub duty: f64,
    pub duration_ms: Millis,
    pub cause: InteractionState,
    pub scent: ScentId,
}

impl ReleaseCommand {
    pub fn end(&self) -> Millis {
        self.start + self.duration_ms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveRelease {
    pub channel: Channel,
    pub end: Millis,
}

/// A rhythm-driven follow-up release.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PendingRepeat {
    pub expr: ScentExpression,
    pub cause: InteractionState,
    pub due: Millis,
    /// When set, the repeat fires only if `cause` still holds at due time.
    pub recheck: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SchedulerState {
    pub last_release_end: Option<Millis>,
    pub active: Option<ActiveRelease>,
    pub pending_repeat: Option<PendingRepeat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuppressReason {
    Cooldown,
    ChannelActive,
}

impl SuppressReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SuppressReason::Cooldown => "cooldown",
            SuppressReason::ChannelActive => "channel_active",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision {
    Scheduled(ReleaseCommand),
    Suppressed(SuppressReason),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReleaseRequest {
    pub expr: ScentExpression,
    pub scent: ScentId,
    pub channel: Channel,
    pub cause: InteractionState,
}

/// What a [`Scheduler::tick`] observed.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TickEvents {
    /// The burst that finished since the previous tick.
    pub finished: Option<ActiveRelease>,
    /// A queued repeat whose due time has arrived; it is removed from the
    /// state and handed to the caller.
    pub due_repeat: Option<PendingRepeat>,
}

/// Single-writer scheduler owned by the control loop.
#[derive(Debug, Clone)]
pub struct Scheduler {
    cfg: SchedulerConfig,
    state: SchedulerState,
    last_tick: Option<Millis>,
}

impl Scheduler {
    pub fn new(cfg: SchedulerConfig) -> Self {
        Self { cfg, state: SchedulerState::default(), last_tick: None }
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.cfg
    }

    pub fn state(&self) -> &SchedulerState {
        &self.state
    }

    /// Would a request at `now` be accepted?
    pub fn check(&self, now: Millis) -> Result<(), SuppressReason> {
        if self.state.active.is_some_and(|a| a.end > now) {
            return Err(SuppressReason::ChannelActive);
        }
        match self.state.last_release_end {
            Some(end) if now < end + self.cfg.min_interval_ms() => Err(SuppressReason::Cooldown),
            _ => Ok(()),
        }
    }

    pub fn request(&mut self, req: &ReleaseRequest, now: Millis) -> Decision {
        if let Err(reason) = self.check(now) {
            return Decision::Suppressed(reason);
        }
        let duration_s = self.cfg.burst_s.get(req.expr.rhythm).min(self.cfg.max_burst_s);
        let cmd = ReleaseCommand {
            start: now,
            channel: req.channel,
            duty: self.cfg.duty.get(req.expr.intensity),
            duration_ms: secs_to_ms(duration_s),
            cause: req.cause,
            scent: req.scent,
        };
        self.state.active = Some(ActiveRelease { channel: cmd.channel, end: cmd.end() });
        self.state.last_release_end = Some(cmd.end());
        self.state.pending_repeat = None;
        Decision::Scheduled(cmd)
    }

    /// Queues the follow-up release implied by the expression's rhythm,
    /// due `min_interval_s` after the last release ends.
    ///
    /// Repeated low-frequency releases are queued unconditionally;
    /// repeat-if-needed only while the state still holds, and is marked for
    /// re-checking at due time; single releases never repeat.
    pub fn expand_rhythm(
        &mut self,
        expr: &ScentExpression,
        cause: InteractionState,
        state_still_holds: bool,
    ) -> Option<PendingRepeat> {
        let last_end = self.state.last_release_end?;
        let recheck = match expr.rhythm {
            Rhythm::SingleBrief => return None,
            Rhythm::RepeatedLowFrequency => false,
            Rhythm::BriefRepeatIfNeeded if state_still_holds => true,
            Rhythm::BriefRepeatIfNeeded => return None,
        };
        let pending = PendingRepeat { expr: *expr, cause, due: last_end + self.cfg.min_interval_ms(), recheck };
        self.state.pending_repeat = Some(pending);
        Some(pending)
    }

    /// Advances the clock: clears a finished burst and surfaces a due repeat.
    pub fn tick(&mut self, now: Millis) -> Result<TickEvents, TickError> {
        if let Some(previous) = self.last_tick {
            if now < previous {
                return Err(TickError::TimeRegression { now, previous });
            }
        }
        self.last_tick = Some(now);

        let mut events = TickEvents::default();
        if self.state.active.is_some_and(|a| a.end <= now) {
            events.finished = self.state.active.take();
        }
        if self.state.pending_repeat.is_some_and(|p| p.due <= now) {
            events.due_repeat = self.state.pending_repeat.take();
        }
        Ok(events)
    }
}
