//! Scent selection and scheduler properties, the latter against a reference
//! simulator that re-derives every decision from the full release history.

use proptest::prelude::*;
use scentctl_core::scent::{expression_for, select_scent};
use scentctl_core::scheduler::{ReleaseRequest, TickEvents};
use scentctl_core::{
    Channel, Decision, InteractionState, Millis, Profile, Rhythm, ScentId, Scheduler, SchedulerConfig,
    SelectionHistory, SuppressReason,
};

fn acting_state() -> impl Strategy<Value = InteractionState> {
    prop::sample::select(&InteractionState::ALL[..5])
}

proptest! {
    #[test]
    fn never_repeats_a_multi_member_choice(states in prop::collection::vec(acting_state(), 1..80), seed in any::<u64>()) {
        let mut history = SelectionHistory::default();
        let mut previous: Option<ScentId> = None;
        for (i, state) in states.into_iter().enumerate() {
            let expr = expression_for(state).unwrap();
            let (pick, next) = select_scent(&expr, &history, seed.wrapping_add(i as u64));
            prop_assert!(expr.candidates.contains(&pick));
            prop_assert!(expr.profile.members().contains(&pick));
            if expr.candidates.len() > 1 {
                prop_assert_ne!(Some(pick), previous);
            }
            prop_assert_eq!(next.count(pick), history.count(pick) + 1);
            prop_assert_eq!(next.counts.iter().sum::<u32>(), history.counts.iter().sum::<u32>() + 1);
            previous = Some(pick);
            history = next;
        }
    }

    #[test]
    fn single_profile_selection_is_fair(state in acting_state(), n in 1usize..120, seed in any::<u64>()) {
        let expr = expression_for(state).unwrap();
        let mut history = SelectionHistory::default();
        for i in 0..n {
            history = select_scent(&expr, &history, seed ^ i as u64).1;
        }
        let counts: Vec<u32> = expr.candidates.iter().map(|&id| history.count(id)).collect();
        let k = counts.len() as u32;
        let ceil = (n as u32).div_ceil(k);
        prop_assert!(counts.iter().all(|&c| c + 1 >= ceil && c <= ceil), "{counts:?} n={n}");
    }

    #[test]
    fn selection_is_seed_deterministic(state in acting_state(), seed in any::<u64>(), last in prop::option::of(prop::sample::select(&ScentId::ALL[..]))) {
        let expr = expression_for(state).unwrap();
        let history = SelectionHistory { last_released_scent: last, counts: [0; 8] };
        prop_assert_eq!(select_scent(&expr, &history, seed), select_scent(&expr, &history, seed));
    }
}

#[test]
fn exclusion_examples() {
    let forest = expression_for(InteractionState::ElevatedStressPersistent).unwrap();
    let history = SelectionHistory { last_released_scent: Some(ScentId::Cedarwood), counts: [0; 8] };
    for seed in 0..50 {
        let (pick, _) = select_scent(&forest, &history, seed);
        assert!(matches!(pick, ScentId::Frankincense | ScentId::Vetiver));
    }
    let open_air = expression_for(InteractionState::LowAlertness).unwrap();
    let history = SelectionHistory { last_released_scent: Some(ScentId::Peppermint), counts: [0; 8] };
    assert_eq!(select_scent(&open_air, &history, 3).0, ScentId::TeaTree);
}

#[derive(Debug, Clone)]
struct Req {
    at: Millis,
    state: InteractionState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Emitted {
    start: Millis,
    end: Millis,
}

/// Literal reading of the constraints: scan every prior release.
fn reference(reqs: &[Req], cfg: &SchedulerConfig) -> Vec<Result<Emitted, SuppressReason>> {
    let cooldown = (cfg.min_interval_s * 1000.0).round() as Millis;
    let mut emitted: Vec<Emitted> = Vec::new();
    let mut out = Vec::new();
    for r in reqs {
        let active = emitted.iter().any(|e| e.start <= r.at && r.at < e.end);
        let cooling = emitted.iter().any(|e| r.at < e.end + cooldown);
        if active {
            out.push(Err(SuppressReason::ChannelActive));
        } else if cooling {
            out.push(Err(SuppressReason::Cooldown));
        } else {
            let rhythm = expression_for(r.state).unwrap().rhythm;
            let secs = match rhythm {
                Rhythm::SingleBrief => cfg.burst_s.single_brief,
                Rhythm::RepeatedLowFrequency => cfg.burst_s.repeated_low_frequency,
                Rhythm::BriefRepeatIfNeeded => cfg.burst_s.brief_repeat_if_needed,
            }
            .min(cfg.max_burst_s);
            let e = Emitted { start: r.at, end: r.at + (secs * 1000.0).round() as Millis };
            emitted.push(e);
            out.push(Ok(e));
        }
    }
    out
}

fn scheduler_case() -> impl Strategy<Value = (SchedulerConfig, Vec<Req>)> {
    let cfg = (1.0f64..1200.0, 1.0f64..=30.0, prop::array::uniform3(0.5f64..=1.0)).prop_map(
        |(min_interval_s, max_burst_s, f)| {
            let mut c = SchedulerConfig { min_interval_s, max_burst_s, ..SchedulerConfig::default() };
            c.burst_s.single_brief = (f[0] * max_burst_s).max(0.5);
            c.burst_s.repeated_low_frequency = (f[1] * max_burst_s).max(0.5);
            c.burst_s.brief_repeat_if_needed = (f[2] * max_burst_s).max(0.5);
            c
        },
    );
    let reqs = prop::collection::vec((0u64..400_000, acting_state()), 0..=50).prop_map(|steps| {
        let mut t = 0;
        steps
            .into_iter()
            .map(|(dt, state)| {
                t += dt;
                Req { at: t, state }
            })
            .collect()
    });
    (cfg, reqs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn scheduler_matches_reference((cfg, reqs) in scheduler_case()) {
        prop_assert!(cfg.validate().is_ok());
        let expected = reference(&reqs, &cfg);
        let mut s = Scheduler::new(cfg.clone());
        let mut log: Vec<Emitted> = Vec::new();
        for (r, want) in reqs.iter().zip(expected) {
            s.tick(r.at).unwrap();
            let expr = expression_for(r.state).unwrap();
            let req = ReleaseRequest { expr, scent: expr.candidates[0], channel: Channel::new(1).unwrap(), cause: r.state };
            let pre = s.check(r.at);
            let got = match s.request(&req, r.at) {
                Decision::Scheduled(c) => {
                    prop_assert!(c.duration_ms <= cfg.max_burst_ms());
                    Ok(Emitted { start: c.start, end: c.end() })
                }
                Decision::Suppressed(reason) => Err(reason),
            };
            prop_assert_eq!(pre.is_ok(), got.is_ok());
            prop_assert_eq!(got, want);
            if let Ok(e) = got {
                log.push(e);
                if let Some(p) = s.expand_rhythm(&expr, r.state, true) {
                    prop_assert_eq!(p.due, e.end + cfg.min_interval_ms());
                }
            }
        }
        for pair in log.windows(2) {
            prop_assert!(pair[1].start >= pair[0].end + cfg.min_interval_ms());
        }
    }
}

#[test]
fn rhythm_expansion_rules() {
    let cfg = SchedulerConfig::default();
    let mut s = Scheduler::new(cfg.clone());
    let ch = Channel::new(5).unwrap();
    let request = |s: &mut Scheduler, state: InteractionState, now: Millis| {
        let expr = expression_for(state).unwrap();
        let req = ReleaseRequest { expr, scent: expr.candidates[0], channel: ch, cause: state };
        match s.request(&req, now) {
            Decision::Scheduled(c) => (expr, c),
            d => panic!("{d:?}"),
        }
    };

    let (expr, c) = request(&mut s, InteractionState::ElevatedStressPersistent, 0);
    let p = s.expand_rhythm(&expr, InteractionState::ElevatedStressPersistent, false).unwrap();
    assert_eq!(p.due, c.end() + 900_000);
    assert!(!p.recheck);
    assert_eq!(s.tick(p.due - 1).unwrap().due_repeat, None);
    let TickEvents { due_repeat, .. } = s.tick(p.due).unwrap();
    assert_eq!(due_repeat, Some(p));

    let (expr, _) = request(&mut s, InteractionState::LowAlertness, p.due);
    assert!(s.expand_rhythm(&expr, InteractionState::LowAlertness, false).is_none());
    assert!(s.expand_rhythm(&expr, InteractionState::LowAlertness, true).unwrap().recheck);

    let mut s = Scheduler::new(cfg);
    let (expr, _) = request(&mut s, InteractionState::Recovery, 0);
    assert!(s.expand_rhythm(&expr, InteractionState::Recovery, true).is_none());
    assert_eq!(expr.profile, Profile::Garden);
}
