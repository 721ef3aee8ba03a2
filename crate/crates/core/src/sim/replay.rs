//! Discrete-event replay of physiological traces through the full pipeline.
//!
//! Evaluation instants are the ends of the feature windows that follow the
//! calibration period. At each instant the loop advances the scheduler clock,
//! normalizes the window, estimates and smooths the A/V point, classifies
//! it, and either fires a due rhythm repeat or requests the state's own
//! expression. Every stage's output is appended to the event log.

use thiserror::Error;

use super::generate::SessionTraces;
use super::log::{EventLog, EventRecord, Outcome};
use crate::config::{Config, ConfigError};
use crate::estimator::{smooth_av, AffectEstimator, AvState, EstimateError, LinearSurrogate};
use crate::features::{compute_baseline, hrv_windows, FeatureError, FeatureWindow, WindowConfig};
use crate::hrv::reject_artifacts;
use crate::ir::{command_sequence_for, DeviceCommand, IrCodeTable, TimedCommand};
use crate::samples::clean_hr;
use crate::scent::{expression_for, select_scent, ChannelMap, ScentExpression, SelectionHistory};
use crate::scheduler::{Decision, ReleaseRequest, Scheduler, TickError};
use crate::state::{classify, InteractionState, PersistenceTracker, Zone};
use crate::{secs_to_ms, Millis};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("no RR samples survive artifact rejection")]
    NoUsableRr,
    #[error("calibration failed: {0}")]
    Calibration(#[source] FeatureError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Tick(#[from] TickError),
}

/// Per-release tie-break seed derived from the session seed.
fn selection_seed(seed: u64, release_index: u32) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ u64::from(release_index).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A configured pipeline; reusable across sessions.
#[derive(Debug, Clone)]
pub struct Pipeline<E = LinearSurrogate> {
    cfg: Config,
    estimator: E,
    window: WindowConfig,
    channels: ChannelMap,
    codes: IrCodeTable,
}

impl Pipeline<LinearSurrogate> {
    pub fn new(cfg: &Config) -> Result<Self, ConfigError> {
        Self::with_estimator(cfg, LinearSurrogate::from(&cfg.estimator))
    }
}

impl<E: AffectEstimator> Pipeline<E> {
    pub fn with_estimator(cfg: &Config, estimator: E) -> Result<Self, ConfigError> {
        cfg.validate()?;
        Ok(Self {
            window: cfg.features.window().map_err(|e| ConfigError::Invalid(e.to_string()))?,
            channels: cfg.channel_map()?,
            codes: cfg.code_table()?,
            cfg: cfg.clone(),
            estimator,
        })
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    pub fn replay(&self, traces: &SessionTraces) -> Result<EventLog, ReplayError> {
        let rr = reject_artifacts(&traces.rr);
        if rr.is_empty() {
            return Err(ReplayError::NoUsableRr);
        }
        let hr = clean_hr(&traces.hr);
        let context = traces.context_trace();
        let windows = hrv_windows(&rr, &hr, self.window);

        let calibration_end = self.cfg.features.calibration_ms();
        let calibration: Vec<_> = windows.iter().filter(|w| w.window_end <= calibration_end).copied().collect();
        let baseline = compute_baseline(&calibration, self.cfg.features.floors()).map_err(ReplayError::Calibration)?;

        let mut run = Run {
            pipeline: self,
            log: Vec::with_capacity(windows.len() * 4),
            scheduler: Scheduler::new(self.cfg.scheduler.clone()),
            history: SelectionHistory::default(),
        };
        let alpha = self.cfg.estimator.smoothing_alpha;
        let horizon = secs_to_ms(self.cfg.scheduler.repeat_check_horizon_s);
        let mut tracker = PersistenceTracker::default();
        let mut smoothed: Option<AvState> = None;

        for w in windows.iter().filter(|w| w.window_end > calibration_end) {
            let now = w.window_end;
            let events = run.scheduler.tick(now)?;
            if let Some(done) = events.finished {
                run.ir(TimedCommand { at: done.end, command: DeviceCommand::Shutdown });
            }

            let fw = FeatureWindow::normalize(w, &baseline, context.flags_at(now));
            run.log.push(EventRecord::Feature {
                timestamp: now,
                window_start: fw.window_start,
                rmssd: fw.rmssd,
                sdnn: fw.sdnn,
                mean_hr: fw.mean_hr,
                z_hr: fw.z_hr,
                z_rmssd: fw.z_rmssd,
                z_sdnn: fw.z_sdnn,
                work_minutes: fw.context.work_minutes_continuous,
                session_active: fw.context.session_active,
                activity: fw.context.activity_state,
            });

            let raw = self.estimator.estimate(&fw)?;
            let av = match smoothed {
                Some(prev) => smooth_av(&prev, &raw, alpha),
                None => raw,
            };
            smoothed = Some(av);
            run.log.push(EventRecord::AvState {
                timestamp: now,
                arousal: av.arousal,
                valence: av.valence,
                raw_arousal: raw.arousal,
                raw_valence: raw.valence,
            });

            let (state, next) = classify(&av, &fw.context, &tracker, &self.cfg.estimator);
            tracker = next;
            run.log.push(EventRecord::Interaction { timestamp: now, state, zone: Zone::of(&av, &self.cfg.estimator) });

            let mut fired_repeat = false;
            if let Some(rep) = events.due_repeat {
                let outcome = if now > rep.due + horizon {
                    Some(Outcome::RepeatExpired)
                } else if state == InteractionState::Neutral || (rep.recheck && state != rep.cause) {
                    Some(Outcome::RepeatCancelled)
                } else {
                    None
                };
                match outcome {
                    Some(outcome) => run.log.push(decision_record(now, &rep.expr, rep.cause, outcome, true)),
                    None => {
                        run.attempt(&rep.expr, rep.cause, true, state, now);
                        fired_repeat = true;
                    }
                }
            }
            if !fired_repeat {
                if let Some(expr) = expression_for(state) {
                    run.attempt(&expr, state, false, state, now);
                }
            }
        }

        if let Some(active) = run.scheduler.state().active {
            run.ir(TimedCommand { at: active.end, command: DeviceCommand::Shutdown });
        }
        Ok(EventLog { records: run.log })
    }
}

fn decision_record(
    now: Millis,
    expr: &ScentExpression,
    cause: InteractionState,
    outcome: Outcome,
    repeat: bool,
) -> EventRecord {
    EventRecord::Decision {
        timestamp: now,
        cause,
        outcome,
        repeat,
        profile: expr.profile,
        intensity: expr.intensity,
        rhythm: expr.rhythm,
        scent: None,
        channel: None,
        repeat_due: None,
    }
}

/// Mutable state of one replay.
struct Run<'p, E> {
    pipeline: &'p Pipeline<E>,
    log: Vec<EventRecord>,
    scheduler: Scheduler,
    history: SelectionHistory,
}

impl<E> Run<'_, E> {
    fn ir(&mut self, tc: TimedCommand) {
        self.log.push(EventRecord::IrCommand {
            timestamp: tc.at,
            command: tc.command.key(),
            code: format!("{:#010x}", self.pipeline.codes.code(tc.command)),
        });
    }

    fn attempt(
        &mut self,
        expr: &ScentExpression,
        cause: InteractionState,
        repeat: bool,
        current: InteractionState,
        now: Millis,
    ) {
        if let Err(reason) = self.scheduler.check(now) {
            self.log.push(decision_record(now, expr, cause, Outcome::Suppressed, repeat));
            self.log.push(EventRecord::Suppression { timestamp: now, reason, cause });
            return;
        }
        let released: u32 = self.history.counts.iter().sum();
        let (scent, history) = select_scent(expr, &self.history, selection_seed(self.pipeline.cfg.seed, released));
        let channel = self.pipeline.channels.channel(scent);
        let req = ReleaseRequest { expr: *expr, scent, channel, cause };
        let Decision::Scheduled(cmd) = self.scheduler.request(&req, now) else {
            unreachable!("check() passed at the same instant");
        };
        self.history = history;
        // repeats do not chain
        let repeat_due =
            if repeat { None } else { self.scheduler.expand_rhythm(expr, cause, current == cause).map(|p| p.due) };

        let mut decision = decision_record(now, expr, cause, Outcome::Scheduled, repeat);
        if let EventRecord::Decision { scent: s, channel: c, repeat_due: r, .. } = &mut decision {
            *s = Some(scent);
            *c = Some(channel);
            *r = repeat_due;
        }
        self.log.push(decision);
        self.log.push(EventRecord::Release {
            timestamp: cmd.start,
            channel: cmd.channel,
            scent: cmd.scent,
            duty: cmd.duty,
            duration_ms: cmd.duration_ms,
            cause: cmd.cause,
        });
        let [select, power, _shutdown] = command_sequence_for(&cmd);
        self.ir(select);
        self.ir(power);
    }
}

/// Replays `traces` with a pipeline built from `cfg`.
pub fn replay(traces: &SessionTraces, cfg: &Config) -> Result<EventLog, crate::Error> {
    let pipeline = Pipeline::new(cfg)?;
    Ok(pipeline.replay(traces)?)
}
