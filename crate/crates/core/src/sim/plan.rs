//! Work/break session plans and scripted physiological episodes.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::samples::ParseError;

/// Continuous work stretch before fatigue sets in, in minutes.
pub const WORK_MINUTES: RangeInclusive<u32> = 30..=45;
/// Restorative break length, in minutes.
pub const BREAK_MINUTES: RangeInclusive<u32> = 5..=10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Work,
    Break,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    pub minutes: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SessionPlan {
    pub blocks: Vec<Block>,
}

impl SessionPlan {
    /// Alternating work and break blocks, starting with work, until at least
    /// `min_total_minutes` are covered. Block lengths are drawn uniformly from
    /// [`WORK_MINUTES`] and [`BREAK_MINUTES`]; no block is truncated.
    pub fn generate(seed: u64, min_total_minutes: u32) -> SessionPlan {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut blocks = Vec::new();
        let mut total = 0;
        let mut kind = BlockKind::Work;
        while total < min_total_minutes {
            let range = match kind {
                BlockKind::Work => WORK_MINUTES,
                BlockKind::Break => BREAK_MINUTES,
            };
            let minutes = rng.random_range(range);
            blocks.push(Block { kind, minutes });
            total += minutes;
            kind = match kind {
                BlockKind::Work => BlockKind::Break,
                BlockKind::Break => BlockKind::Work,
            };
        }
        SessionPlan { blocks }
    }

    pub fn total_minutes(&self) -> u32 {
        self.blocks.iter().map(|b| b.minutes).sum()
    }

    /// Start offset of every block, in minutes from plan start.
    pub fn block_starts(&self) -> impl Iterator<Item = (u32, &Block)> {
        self.blocks.iter().scan(0, |t, b| {
            let start = *t;
            *t += b.minutes;
            Some((start, b))
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,minutes\n");
        for b in &self.blocks {
            let kind = match b.kind {
                BlockKind::Work => "work",
                BlockKind::Break => "break",
            };
            let _ = writeln!(out, "{kind},{}", b.minutes);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeKind {
    Stress,
    Fatigue,
}

/// A scripted physiological episode. Times are minutes from plan start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub start_min: f64,
    pub duration_min: f64,
    pub kind: EpisodeKind,
    pub magnitude: f64,
}

impl Episode {
    pub fn end_min(&self) -> f64 {
        self.start_min + self.duration_min
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScriptError {
    #[error("episode {index}: magnitude {magnitude} outside (0, 1]")]
    Magnitude { index: usize, magnitude: f64 },
    #[error("episode {index}: duration must be positive")]
    Duration { index: usize },
    #[error("episode {index} ({start}..{end} min) exceeds the {total} minute plan")]
    OutOfBounds { index: usize, start: f64, end: f64, total: u32 },
    #[error("episodes {first} and {second} overlap")]
    Overlap { first: usize, second: usize },
    #[error("plan block {index} has zero length")]
    EmptyBlock { index: usize },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EpisodeScript {
    pub episodes: Vec<Episode>,
}

impl EpisodeScript {
    pub fn new(episodes: Vec<Episode>) -> Self {
        Self { episodes }
    }

    pub fn validate(&self, plan: &SessionPlan) -> Result<(), ScriptError> {
        if let Some(index) = plan.blocks.iter().position(|b| b.minutes == 0) {
            return Err(ScriptError::EmptyBlock { index });
        }
        let total = plan.total_minutes();
        for (index, e) in self.episodes.iter().enumerate() {
            if !(e.magnitude > 0.0 && e.magnitude <= 1.0) {
                return Err(ScriptError::Magnitude { index, magnitude: e.magnitude });
            }
            if !(e.duration_min > 0.0 && e.duration_min.is_finite()) {
                return Err(ScriptError::Duration { index });
            }
            if e.start_min.is_nan() || e.start_min < 0.0 || e.end_min() > f64::from(total) {
                return Err(ScriptError::OutOfBounds { index, start: e.start_min, end: e.end_min(), total });
            }
        }
        let mut order: Vec<usize> = (0..self.episodes.len()).collect();
        order.sort_by(|&a, &b| self.episodes[a].start_min.total_cmp(&self.episodes[b].start_min));
        for pair in order.windows(2) {
            let (a, b) = (&self.episodes[pair[0]], &self.episodes[pair[1]]);
            if a.end_min() > b.start_min {
                return Err(ScriptError::Overlap { first: pair[0].min(pair[1]), second: pair[0].max(pair[1]) });
            }
        }
        Ok(())
    }

    /// Parses `start_min,duration_min,kind,magnitude` lines (header optional,
    /// `#` comments allowed). An empty file is an empty script.
    pub fn parse(text: &str) -> Result<EpisodeScript, ParseError> {
        let mut episodes = Vec::new();
        let mut first = true;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.split('#').next().unwrap_or("").trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if std::mem::take(&mut first) && fields[0].parse::<f64>().is_err() {
                continue;
            }
            let malformed = |reason: String| ParseError::Malformed { line, reason };
            if fields.len() != 4 {
                return Err(malformed(format!("expected 4 fields, found {}", fields.len())));
            }
            let num = |i: usize, name: &str| {
                fields[i].parse::<f64>().map_err(|_| malformed(format!("{name} is not a number: {:?}", fields[i])))
            };
            let kind = match fields[2].to_ascii_lowercase().as_str() {
                "stress" => EpisodeKind::Stress,
                "fatigue" => EpisodeKind::Fatigue,
                other => return Err(malformed(format!("kind must be stress or fatigue, got {other:?}"))),
            };
            episodes.push(Episode {
                start_min: num(0, "start_min")?,
                duration_min: num(1, "duration_min")?,
                kind,
                magnitude: num(3, "magnitude")?,
            });
        }
        Ok(EpisodeScript { episodes })
    }
}
