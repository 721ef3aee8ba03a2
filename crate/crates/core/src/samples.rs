//! Timestamped physiological samples and their CSV representation.
//!
//! Three line-oriented schemas are accepted, each with an optional header
//! line (recognized by a non-numeric first field):
//!
//! - RR stream: `timestamp_ms,rr_ms`
//! - HR stream: `timestamp_ms,hr_bpm`
//! - context stream: `timestamp_ms,session_active,activity_state`

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Millis;

/// Heart rates outside this band are treated as sensor noise.
pub const HR_VALID_BPM: (f64, f64) = (20.0, 250.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("malformed line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: timestamp {timestamp} precedes previous timestamp {previous}")]
    NonMonotonic { line: usize, timestamp: Millis, previous: Millis },
    #[error("stream contains no samples")]
    Empty,
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Malformed { line, .. } | ParseError::NonMonotonic { line, .. } => Some(*line),
            ParseError::Empty => None,
        }
    }
}

/// A record type that can be read from and written to one CSV schema.
pub trait CsvSample: Sized {
    const HEADER: &'static str;
    const FIELDS: usize;

    fn timestamp(&self) -> Millis;

    /// Builds a sample from the fields that follow the timestamp.
    fn from_fields(timestamp: Millis, fields: &[&str]) -> Result<Self, String>;

    fn write_fields(&self, out: &mut String);
}

/// Inter-beat interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrSample {
    pub timestamp: Millis,
    /// Interval in milliseconds, always positive.
    pub rr: f64,
}

impl RrSample {
    pub fn new(timestamp: Millis, rr: f64) -> Self {
        Self { timestamp, rr }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HrSample {
    pub timestamp: Millis,
    /// Beats per minute.
    pub hr: f64,
}

impl HrSample {
    pub fn new(timestamp: Millis, hr: f64) -> Self {
        Self { timestamp, hr }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ActivityState {
    #[default]
    Sedentary,
    Active,
}

impl ActivityState {
    pub fn as_str(self) -> &'static str {
        match self {
            ActivityState::Sedentary => "sedentary",
            ActivityState::Active => "active",
        }
    }
}

impl fmt::Display for ActivityState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of the context stream: the state holds until the next row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextSample {
    pub timestamp: Millis,
    pub session_active: bool,
    pub activity: ActivityState,
}

/// Contextual cues attached to each feature window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextFlags {
    /// Minutes of uninterrupted work; zero whenever the session is inactive.
    pub work_minutes_continuous: f64,
    pub activity_state: ActivityState,
    pub session_active: bool,
}

impl Default for ContextFlags {
    fn default() -> Self {
        Self { work_minutes_continuous: 0.0, activity_state: ActivityState::Sedentary, session_active: false }
    }
}

impl CsvSample for RrSample {
    const HEADER: &'static str = "timestamp_ms,rr_ms";
    const FIELDS: usize = 2;

    fn timestamp(&self) -> Millis {
        self.timestamp
    }

    fn from_fields(timestamp: Millis, fields: &[&str]) -> Result<Self, String> {
        let rr = parse_positive(fields[0], "rr_ms")?;
        Ok(Self { timestamp, rr })
    }

    fn write_fields(&self, out: &mut String) {
        let _ = write!(out, "{},{:.3}", self.timestamp, self.rr);
    }
}

impl CsvSample for HrSample {
    const HEADER: &'static str = "timestamp_ms,hr_bpm";
    const FIELDS: usize = 2;

    fn timestamp(&self) -> Millis {
        self.timestamp
    }

    fn from_fields(timestamp: Millis, fields: &[&str]) -> Result<Self, String> {
        let hr = parse_positive(fields[0], "hr_bpm")?;
        Ok(Self { timestamp, hr })
    }

    fn write_fields(&self, out: &mut String) {
        let _ = write!(out, "{},{:.3}", self.timestamp, self.hr);
    }
}

impl CsvSample for ContextSample {
    const HEADER: &'static str = "timestamp_ms,session_active,activity_state";
    const FIELDS: usize = 3;

    fn timestamp(&self) -> Millis {
        self.timestamp
    }

    fn from_fields(timestamp: Millis, fields: &[&str]) -> Result<Self, String> {
        let session_active = match fields[0].to_ascii_lowercase().as_str() {
            "true" | "1" => true,
            "false" | "0" => false,
            other => return Err(format!("session_active must be true/false, got {other:?}")),
        };
        let activity = match fields[1].to_ascii_lowercase().as_str() {
            "sedentary" => ActivityState::Sedentary,
            "active" => ActivityState::Active,
            other => return Err(format!("activity_state must be sedentary/active, got {other:?}")),
        };
        Ok(Self { timestamp, session_active, activity })
    }

    fn write_fields(&self, out: &mut String) {
        let _ = write!(out, "{},{},{}", self.timestamp, self.session_active, self.activity);
    }
}

fn parse_positive(field: &str, name: &str) -> Result<f64, String> {
    let v: f64 = field.parse().map_err(|_| format!("{name} is not a number: {field:?}"))?;
    if !v.is_finite() || v <= 0.0 {
        return Err(format!("{name} must be positive and finite, got {field}"));
    }
    Ok(v)
}

/// Parses one CSV stream.
///
/// Blank lines are ignored. Timestamps must be non-decreasing; a repeated
/// timestamp replaces the previous sample. Line numbers in errors are
/// 1-based over the raw input.
pub fn parse_samples<S: CsvSample>(text: &str) -> Result<Vec<S>, ParseError> {
    let mut out: Vec<S> = Vec::new();
    let mut seen_content = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();

        if !seen_content {
            seen_content = true;
            if fields[0].parse::<f64>().is_err() {
                continue; // header
            }
        }

        if fields.len() != S::FIELDS {
            return Err(ParseError::Malformed {
                line,
                reason: format!("expected {} fields, found {}", S::FIELDS, fields.len()),
            });
        }
        let timestamp: Millis = fields[0].parse().map_err(|_| ParseError::Malformed {
            line,
            reason: format!("timestamp is not a non-negative integer: {:?}", fields[0]),
        })?;
        let sample =
            S::from_fields(timestamp, &fields[1..]).map_err(|reason| ParseError::Malformed { line, reason })?;

        match out.last() {
            Some(prev) if timestamp < prev.timestamp() => {
                return Err(ParseError::NonMonotonic { line, timestamp, previous: prev.timestamp() });
            }
            Some(prev) if timestamp == prev.timestamp() => {
                *out.last_mut().unwrap() = sample;
            }
            _ => out.push(sample),
        }
    }

    if out.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(out)
}

/// Renders samples in the schema [`parse_samples`] reads, header included.
pub fn write_samples<S: CsvSample>(samples: &[S]) -> String {
    let mut out = String::with_capacity(samples.len() * 16 + 32);
    out.push_str(S::HEADER);
    out.push('\n');
    for s in samples {
        s.write_fields(&mut out);
        out.push('\n');
    }
    out
}

/// Drops heart-rate samples outside the physiologically plausible band.
pub fn clean_hr(hr: &[HrSample]) -> Vec<HrSample> {
    let (lo, hi) = HR_VALID_BPM;
    hr.iter().copied().filter(|s| (lo..=hi).contains(&s.hr)).collect()
}

/// Context stream with precomputed work-run starts for O(log n) lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextTrace {
    samples: Vec<ContextSample>,
    /// For each sample, the timestamp at which its continuous active run began.
    run_start: Vec<Millis>,
}

impl ContextTrace {
    /// `samples` must be ordered by timestamp (as produced by [`parse_samples`]).
    pub fn new(samples: Vec<ContextSample>) -> Self {
        let mut run_start = Vec::with_capacity(samples.len());
        let mut current: Option<Millis> = None;
        for s in &samples {
            if s.session_active {
                let start = *current.get_or_insert(s.timestamp);
                run_start.push(start);
            } else {
                current = None;
                run_start.push(s.timestamp);
            }
        }
        Self { samples, run_start }
    }

    /// Used when no context stream is supplied: one work session from t = 0.
    pub fn always_working() -> Self {
        Self::new(vec![ContextSample { timestamp: 0, session_active: true, activity: ActivityState::Sedentary }])
    }

    pub fn samples(&self) -> &[ContextSample] {
        &self.samples
    }

    /// Context in effect at `t`. Before the first sample the session is idle.
    pub fn flags_at(&self, t: Millis) -> ContextFlags {
        let n = self.samples.partition_point(|s| s.timestamp <= t);
        if n == 0 {
            return ContextFlags::default();
        }
        let s = &self.samples[n - 1];
        let work_minutes_continuous =
            if s.session_active { (t - self.run_start[n - 1]) as f64 / 60_000.0 } else { 0.0 };
        ContextFlags { work_minutes_continuous, activity_state: s.activity, session_active: s.session_active }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_rr() {
        let got: Vec<RrSample> = parse_samples("0,800\n800,810").unwrap();
        assert_eq!(got, vec![RrSample::new(0, 800.0), RrSample::new(800, 810.0)]);
    }

    #[test]
    fn duplicate_timestamp_keeps_last() {
        let got: Vec<RrSample> = parse_samples("0,800\n0,790").unwrap();
        assert_eq!(got, vec![RrSample::new(0, 790.0)]);
    }

    #[test]
    fn malformed_value_reports_line() {
        let err = parse_samples::<RrSample>("0,abc").unwrap_err();
        assert!(matches!(err, ParseError::Malformed { line: 1, .. }), "{err}");
    }

    #[test]
    fn header_is_skipped_and_lines_counted() {
        let err = parse_samples::<RrSample>("timestamp_ms,rr_ms\n0,800\n\n5,-1").unwrap_err();
        assert_eq!(err.line(), Some(4));
    }

    #[test]
    fn non_monotonic_and_empty() {
        assert!(matches!(
            parse_samples::<RrSample>("10,800\n5,800"),
            Err(ParseError::NonMonotonic { line: 2, timestamp: 5, previous: 10 })
        ));
        assert_eq!(parse_samples::<RrSample>(""), Err(ParseError::Empty));
        assert_eq!(parse_samples::<RrSample>("timestamp_ms,rr_ms\n"), Err(ParseError::Empty));
    }

    #[test]
    fn wrong_field_count() {
        assert!(parse_samples::<HrSample>("0,70,1").is_err());
        assert!(parse_samples::<ContextSample>("0,true").is_err());
    }

    #[test]
    fn context_parse_and_roundtrip() {
        let text =
            "timestamp_ms,session_active,activity_state\n0,false,sedentary\n60000,true,sedentary\n120000,1,active\n";
        let ctx: Vec<ContextSample> = parse_samples(text).unwrap();
        assert_eq!(ctx.len(), 3);
        assert!(ctx[2].session_active);
        assert_eq!(ctx[2].activity, ActivityState::Active);
        let again: Vec<ContextSample> = parse_samples(&write_samples(&ctx)).unwrap();
        assert_eq!(again, ctx);
    }

    #[test]
    fn hr_cleaning() {
        let hr = [HrSample::new(0, 19.0), HrSample::new(1, 20.0), HrSample::new(2, 250.0), HrSample::new(3, 251.0)];
        let kept: Vec<_> = clean_hr(&hr).iter().map(|s| s.timestamp).collect();
        assert_eq!(kept, vec![1, 2]);
    }

    #[test]
    fn work_minutes_accumulate_and_reset() {
        let ctx = ContextTrace::new(vec![
            ContextSample { timestamp: 0, session_active: false, activity: ActivityState::Sedentary },
            ContextSample { timestamp: 60_000, session_active: true, activity: ActivityState::Sedentary },
            ContextSample { timestamp: 120_000, session_active: true, activity: ActivityState::Active },
            ContextSample { timestamp: 600_000, session_active: false, activity: ActivityState::Active },
        ]);
        assert_eq!(ctx.flags_at(30_000).work_minutes_continuous, 0.0);
        // continuing run across the activity change
        assert_eq!(ctx.flags_at(360_000).work_minutes_continuous, 5.0);
        let idle = ctx.flags_at(700_000);
        assert!(!idle.session_active);
        assert_eq!(idle.work_minutes_continuous, 0.0);
    }
}
