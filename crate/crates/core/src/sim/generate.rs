//! Synthetic RR/HR/context traces.
//!
//! RR intervals are Gaussian jitter around a mean. Stress episodes lower the
//! mean and shrink the jitter in proportion to their magnitude; fatigue
//! episodes raise the mean. Episode effects ramp linearly in and out so the
//! traces pass artifact rejection. Every session starts with a quiet
//! calibration period (session inactive) before the plan's first block.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::plan::{BlockKind, EpisodeKind, EpisodeScript, ScriptError, SessionPlan};
use crate::samples::{ActivityState, ContextSample, ContextTrace, HrSample, RrSample};
use crate::{secs_to_ms, Millis};

/// The `simulator` config section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulatorConfig {
    /// Minimum plan length for generated sessions.
    pub session_minutes: u32,
    pub base_rr_ms: f64,
    /// Standard deviation of beat-to-beat jitter at rest.
    pub jitter_ms: f64,
    /// Mean RR reduction at stress magnitude 1.
    pub stress_rr_drop_ms: f64,
    /// Fractional jitter reduction at stress magnitude 1.
    pub stress_jitter_drop: f64,
    /// Mean RR increase at fatigue magnitude 1.
    pub fatigue_rr_rise_ms: f64,
    pub ramp_s: f64,
    pub hr_interval_s: f64,
}

impl Default for SimulatorConfig {
    fn default() -> Self {
        Self {
            session_minutes: 480,
            base_rr_ms: 800.0,
            jitter_ms: 3.0,
            stress_rr_drop_ms: 150.0,
            stress_jitter_drop: 0.7,
            fatigue_rr_rise_ms: 60.0,
            ramp_s: 30.0,
            hr_interval_s: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SessionTraces {
    pub rr: Vec<RrSample>,
    pub hr: Vec<HrSample>,
    pub context: Vec<ContextSample>,
}

impl SessionTraces {
    pub fn context_trace(&self) -> ContextTrace {
        if self.context.is_empty() {
            ContextTrace::always_working()
        } else {
            ContextTrace::new(self.context.clone())
        }
    }
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

struct ActiveEpisode {
    start: f64,
    end: f64,
    ramp: f64,
    kind: EpisodeKind,
    magnitude: f64,
}

impl ActiveEpisode {
    fn level(&self, t: f64) -> f64 {
        if t <= self.start || t >= self.end {
            return 0.0;
        }
        let edge = ((t - self.start).min(self.end - t) / self.ramp).min(1.0);
        self.magnitude * edge
    }
}

/// Generates one session: `calibration_minutes` of rest followed by `plan`,
/// with `script` episodes positioned relative to the plan start.
pub fn generate_session(
    seed: u64,
    plan: &SessionPlan,
    script: &EpisodeScript,
    sim: &SimulatorConfig,
    calibration_minutes: f64,
) -> Result<SessionTraces, ScriptError> {
    script.validate(plan)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let offset = calibration_minutes * 60_000.0;
    let total = offset + f64::from(plan.total_minutes()) * 60_000.0;
    let episodes: Vec<ActiveEpisode> = script
        .episodes
        .iter()
        .map(|e| ActiveEpisode {
            start: offset + e.start_min * 60_000.0,
            end: offset + e.end_min() * 60_000.0,
            ramp: (sim.ramp_s * 1000.0).max(1.0),
            kind: e.kind,
            magnitude: e.magnitude,
        })
        .collect();

    let mut rr = Vec::with_capacity((total / sim.base_rr_ms) as usize + 16);
    let mut t = 0.0;
    loop {
        let (mut stress, mut fatigue) = (0.0, 0.0);
        for e in &episodes {
            let level = e.level(t);
            match e.kind {
                EpisodeKind::Stress => stress += level,
                EpisodeKind::Fatigue => fatigue += level,
            }
        }
        let mean = sim.base_rr_ms - sim.stress_rr_drop_ms * stress + sim.fatigue_rr_rise_ms * fatigue;
        let sd = sim.jitter_ms * (1.0 - sim.stress_jitter_drop * stress).max(0.0);
        let z: f64 = StandardNormal.sample(&mut rng);
        let interval = round3((mean + sd * z).clamp(350.0, 1900.0));
        t += interval;
        if t > total {
            break;
        }
        rr.push(RrSample::new(t.round() as Millis, interval));
    }

    let hr = derive_hr(&rr, secs_to_ms(sim.hr_interval_s).max(1));

    let mut context = vec![ContextSample { timestamp: 0, session_active: false, activity: ActivityState::Sedentary }];
    for (start, block) in plan.block_starts() {
        let (session_active, activity) = match block.kind {
            BlockKind::Work => (true, ActivityState::Sedentary),
            BlockKind::Break => (false, ActivityState::Active),
        };
        let timestamp = (offset + f64::from(start) * 60_000.0).round() as Millis;
        let sample = ContextSample { timestamp, session_active, activity };
        match context.last_mut() {
            Some(last) if last.timestamp == timestamp => *last = sample,
            _ => context.push(sample),
        }
    }

    Ok(SessionTraces { rr, hr, context })
}

/// Watch-style heart rate: one sample per interval from the beats inside it.
fn derive_hr(rr: &[RrSample], interval: Millis) -> Vec<HrSample> {
    let mut out = Vec::new();
    let mut bucket_end = interval;
    let (mut sum, mut n) = (0.0, 0u32);
    for s in rr {
        while s.timestamp > bucket_end {
            if n > 0 {
                out.push(HrSample::new(bucket_end, round3(60_000.0 * f64::from(n) / sum)));
            }
            sum = 0.0;
            n = 0;
            bucket_end += interval;
        }
        sum += s.rr;
        n += 1;
    }
    out
}
