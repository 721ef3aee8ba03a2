//! Aggregate report over an event log, including a brute-force constraint audit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::log::{EventLog, EventRecord, LoggedRelease, Outcome};
use crate::scheduler::{SchedulerConfig, SuppressReason};
use crate::state::InteractionState;
use crate::Millis;

/// Upper edges (minutes) of the inter-release interval histogram bins; the
/// last bin is open-ended.
pub const INTERVAL_BIN_EDGES_MIN: [u32; 5] = [15, 20, 30, 60, 120];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SummaryError {
    #[error("record {index} at {timestamp} ms precedes the previous record at {previous} ms")]
    OutOfOrder { index: usize, timestamp: Millis, previous: Millis },
    #[error("release record {index} at {timestamp} ms has no scheduled decision at the same instant")]
    OrphanRelease { index: usize, timestamp: Millis },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalBin {
    pub from_min: u32,
    /// `None` for the open-ended last bin.
    pub to_min: Option<u32>,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Violations {
    /// Pairs of releases whose active periods intersect.
    pub overlapping: u32,
    /// Pairs where the later release starts before the cooldown after the earlier one ends.
    pub cooldown: u32,
    /// Releases longer than the configured maximum burst.
    pub burst: u32,
}

impl Violations {
    pub fn total(&self) -> u32 {
        self.overlapping + self.cooldown + self.burst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub releases: u32,
    /// Release counts keyed by channel number; channels never used are omitted.
    pub per_channel: BTreeMap<u8, u32>,
    /// Gaps between one release's end and the next release's start.
    pub interval_histogram: Vec<IntervalBin>,
    pub suppressions: BTreeMap<String, u32>,
    pub repeats_cancelled: u32,
    pub repeats_expired: u32,
    pub violations: Violations,
    pub violation_count: u32,
    /// Seconds spent in each interaction state.
    pub state_occupancy_s: BTreeMap<String, f64>,
}

fn empty_histogram() -> Vec<IntervalBin> {
    let mut from = 0;
    let mut bins: Vec<IntervalBin> = INTERVAL_BIN_EDGES_MIN
        .iter()
        .map(|&to| {
            let bin = IntervalBin { from_min: from, to_min: Some(to), count: 0 };
            from = to;
            bin
        })
        .collect();
    bins.push(IntervalBin { from_min: from, to_min: None, count: 0 });
    bins
}

fn validate(log: &EventLog) -> Result<(), SummaryError> {
    let mut previous = 0;
    let mut scheduled_at: Option<Millis> = None;
    for (index, r) in log.records.iter().enumerate() {
        let timestamp = r.timestamp();
        if timestamp < previous {
            return Err(SummaryError::OutOfOrder { index, timestamp, previous });
        }
        previous = timestamp;
        match r {
            EventRecord::Decision { outcome: Outcome::Scheduled, .. } => scheduled_at = Some(timestamp),
            EventRecord::Release { .. } => {
                if scheduled_at != Some(timestamp) {
                    return Err(SummaryError::OrphanRelease { index, timestamp });
                }
                scheduled_at = None;
            }
            _ => {}
        }
    }
    Ok(())
}

/// Brute-force audit over every pair of releases.
fn audit(releases: &[LoggedRelease], cfg: &SchedulerConfig) -> Violations {
    let cooldown = cfg.min_interval_ms();
    let mut v = Violations::default();
    for (i, a) in releases.iter().enumerate() {
        if a.duration_ms > cfg.max_burst_ms() {
            v.burst += 1;
        }
        for b in &releases[i + 1..] {
            if a.start < b.end() && b.start < a.end() {
                v.overlapping += 1;
            }
            let (first, second) = if a.start <= b.start { (a, b) } else { (b, a) };
            if second.start < first.end() + cooldown {
                v.cooldown += 1;
            }
        }
    }
    v
}

/// Summarizes a replay log. The scheduler config supplies the limits the
/// constraint audit checks against.
pub fn summarize(log: &EventLog, cfg: &SchedulerConfig) -> Result<Summary, SummaryError> {
    validate(log)?;

    let releases: Vec<LoggedRelease> = log.releases().collect();
    let mut per_channel = BTreeMap::new();
    for r in &releases {
        *per_channel.entry(r.channel.get()).or_insert(0) += 1;
    }

    let mut interval_histogram = empty_histogram();
    for pair in releases.windows(2) {
        let gap_min = pair[1].start.saturating_sub(pair[0].end()) as f64 / 60_000.0;
        let bin = INTERVAL_BIN_EDGES_MIN
            .iter()
            .position(|&edge| gap_min < f64::from(edge))
            .unwrap_or(INTERVAL_BIN_EDGES_MIN.len());
        interval_histogram[bin].count += 1;
    }

    let mut suppressions: BTreeMap<String, u32> =
        [SuppressReason::ChannelActive, SuppressReason::Cooldown].iter().map(|r| (r.as_str().to_owned(), 0)).collect();
    let (mut repeats_cancelled, mut repeats_expired) = (0, 0);
    for r in &log.records {
        match r {
            EventRecord::Suppression { reason, .. } => {
                *suppressions.entry(reason.as_str().to_owned()).or_insert(0) += 1
            }
            EventRecord::Decision { outcome, .. } => match outcome {
                Outcome::RepeatCancelled => repeats_cancelled += 1,
                Outcome::RepeatExpired => repeats_expired += 1,
                _ => {}
            },
            _ => {}
        }
    }

    let mut state_occupancy_s: BTreeMap<String, f64> =
        InteractionState::ALL.iter().map(|s| (s.as_str().to_owned(), 0.0)).collect();
    let states: Vec<(Millis, InteractionState)> = log.states().collect();
    let mut last_gap = 0;
    for (i, &(t, state)) in states.iter().enumerate() {
        if let Some(&(next, _)) = states.get(i + 1) {
            last_gap = next - t;
        }
        *state_occupancy_s.get_mut(state.as_str()).expect("all states present") += last_gap as f64 / 1000.0;
    }

    let violations = audit(&releases, cfg);
    Ok(Summary {
        releases: releases.len() as u32,
        per_channel,
        interval_histogram,
        suppressions,
        repeats_cancelled,
        repeats_expired,
        violation_count: violations.total(),
        violations,
        state_occupancy_s,
    })
}
