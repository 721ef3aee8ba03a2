//! Auditable event log, serialized as one JSON object per line.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::Channel;
use crate::samples::ActivityState;
use crate::scent::{Intensity, Profile, Rhythm, ScentId};
use crate::scheduler::SuppressReason;
use crate::state::{InteractionState, Zone};
use crate::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Scheduled,
    Suppressed,
    /// A queued repeat was dropped because its state no longer holds.
    RepeatCancelled,
    /// A queued repeat was not evaluated within the check horizon.
    RepeatExpired,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventRecord {
    Feature {
        timestamp: Millis,
        window_start: Millis,
        rmssd: f64,
        sdnn: f64,
        mean_hr: f64,
        z_hr: f64,
        z_rmssd: f64,
        z_sdnn: f64,
        work_minutes: f64,
        session_active: bool,
        activity: ActivityState,
    },
    AvState {
        timestamp: Millis,
        arousal: f64,
        valence: f64,
        raw_arousal: f64,
        raw_valence: f64,
    },
    #[serde(rename = "interaction_state")]
    Interaction {
        timestamp: Millis,
        state: InteractionState,
        zone: Zone,
    },
    Decision {
        timestamp: Millis,
        cause: InteractionState,
        outcome: Outcome,
        repeat: bool,
        profile: Profile,
        intensity: Intensity,
        rhythm: Rhythm,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scent: Option<ScentId>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        channel: Option<Channel>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        repeat_due: Option<Millis>,
    },
    Release {
        timestamp: Millis,
        channel: Channel,
        scent: ScentId,
        duty: f64,
        duration_ms: Millis,
        cause: InteractionState,
    },
    Suppression {
        timestamp: Millis,
        reason: SuppressReason,
        cause: InteractionState,
    },
    IrCommand {
        timestamp: Millis,
        command: String,
        code: String,
    },
}

impl EventRecord {
    pub fn timestamp(&self) -> Millis {
        match self {
            EventRecord::Feature { timestamp, .. }
            | EventRecord::AvState { timestamp, .. }
            | EventRecord::Interaction { timestamp, .. }
            | EventRecord::Decision { timestamp, .. }
            | EventRecord::Release { timestamp, .. }
            | EventRecord::Suppression { timestamp, .. }
            | EventRecord::IrCommand { timestamp, .. } => *timestamp,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            EventRecord::Feature { .. } => "feature",
            EventRecord::AvState { .. } => "av_state",
            EventRecord::Interaction { .. } => "interaction_state",
            EventRecord::Decision { .. } => "decision",
            EventRecord::Release { .. } => "release",
            EventRecord::Suppression { .. } => "suppression",
            EventRecord::IrCommand { .. } => "ir_command",
        }
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("event log line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// A release as recovered from the log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoggedRelease {
    pub start: Millis,
    pub duration_ms: Millis,
    pub channel: Channel,
    pub scent: ScentId,
    pub duty: f64,
    pub cause: InteractionState,
}

impl LoggedRelease {
    pub fn end(&self) -> Millis {
        self.start + self.duration_ms
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog {
    pub records: Vec<EventRecord>,
}

impl EventLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 160);
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("event records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<EventLog, LogError> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let r = serde_json::from_str(line).map_err(|source| LogError::Json { line: i + 1, source })?;
            records.push(r);
        }
        Ok(EventLog { records })
    }

    pub fn releases(&self) -> impl Iterator<Item = LoggedRelease> + '_ {
        self.records.iter().filter_map(|r| match *r {
            EventRecord::Release { timestamp, channel, scent, duty, duration_ms, cause } => {
                Some(LoggedRelease { start: timestamp, duration_ms, channel, scent, duty, cause })
            }
            _ => None,
        })
    }

    pub fn states(&self) -> impl Iterator<Item = (Millis, InteractionState)> + '_ {
        self.records.iter().filter_map(|r| match *r {
            EventRecord::Interaction { timestamp, state, .. } => Some((timestamp, state)),
            _ => None,
        })
    }
}
