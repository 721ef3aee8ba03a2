use proptest::prelude::*;
use scentctl_core::estimator::{smooth_av, AffectEstimator};
use scentctl_core::state::{classify, Zone};
use scentctl_core::{
    AvState, ContextFlags, EstimatorConfig, FeatureWindow, InteractionState, LinearSurrogate, PersistenceTracker,
};

fn window(z_hr: f64, z_rmssd: f64, z_sdnn: f64) -> FeatureWindow {
    FeatureWindow {
        window_start: 0,
        window_end: 120_000,
        rmssd: 30.0,
        sdnn: 40.0,
        mean_hr: 70.0,
        z_hr,
        z_rmssd,
        z_sdnn,
        context: ContextFlags::default(),
    }
}

fn coord() -> impl Strategy<Value = f64> {
    -1.0f64..=1.0
}

fn tracker() -> impl Strategy<Value = PersistenceTracker> {
    (
        prop_oneof![Just(Zone::Stress), Just(Zone::LowArousal), Just(Zone::Imbalance), Just(Zone::Neutral)],
        0u64..3_600_000,
        prop::option::of(0u64..3_600_000),
    )
        .prop_map(|(current_zone, zone_entered_at, last_stress_exit_at)| PersistenceTracker {
            current_zone,
            zone_entered_at,
            last_stress_exit_at,
        })
}

proptest! {
    #[test]
    fn estimate_stays_in_bounds(z in prop::array::uniform3(prop_oneof![
        8 => -50.0f64..50.0,
        1 => prop::num::f64::NORMAL,
    ])) {
        let av = LinearSurrogate::default().estimate(&window(z[0], z[1], z[2])).unwrap();
        prop_assert!(av.arousal.is_finite() && av.arousal.abs() <= 1.0);
        prop_assert!(av.valence.is_finite() && av.valence.abs() <= 1.0);
    }

    #[test]
    fn non_finite_is_rejected(pos in 0usize..3, bad in prop_oneof![Just(f64::NAN), Just(f64::INFINITY), Just(f64::NEG_INFINITY)]) {
        let mut z = [0.0; 3];
        z[pos] = bad;
        prop_assert!(LinearSurrogate::default().estimate(&window(z[0], z[1], z[2])).is_err());
    }

    #[test]
    fn ema_contracts(pa in coord(), pv in coord(), na in coord(), nv in coord(), alpha in 0.01f64..=1.0) {
        let prev = AvState::new(pa, pv, 0);
        let new = AvState::new(na, nv, 60_000);
        let out = smooth_av(&prev, &new, alpha);
        prop_assert!((out.arousal - pa).abs() <= alpha * (na - pa).abs() + 1e-12);
        prop_assert!((out.valence - pv).abs() <= alpha * (nv - pv).abs() + 1e-12);
        prop_assert_eq!(out.timestamp, 60_000);
        // monotone approach: never overshoots
        prop_assert!((out.arousal - na).abs() <= (pa - na).abs() + 1e-12);
    }

    #[test]
    fn classification_is_exclusive_and_deterministic(
        a in coord(), v in coord(), t in 0u64..7_200_000, work in 0.0f64..90.0, tr in tracker(),
    ) {
        let cfg = EstimatorConfig::default();
        let av = AvState::new(a, v, t.max(tr.zone_entered_at).max(tr.last_stress_exit_at.unwrap_or(0)));
        let ctx = ContextFlags { work_minutes_continuous: work, session_active: true, ..ContextFlags::default() };
        let (s1, t1) = classify(&av, &ctx, &tr, &cfg);
        let (s2, t2) = classify(&av, &ctx, &tr, &cfg);
        prop_assert_eq!((s1, t1), (s2, t2));

        let in_stress = a >= cfg.arousal_threshold && v <= -cfg.valence_threshold;
        prop_assert_eq!(s1.is_stress(), in_stress);
        if in_stress {
            prop_assert_ne!(s1, InteractionState::Recovery);
        }
        if s1 == InteractionState::MildImbalance {
            prop_assert!(v <= -cfg.mild_valence_threshold && !in_stress);
        }
        prop_assert!(t1.zone_entered_at <= av.timestamp);
        if t1.last_stress_exit_at != tr.last_stress_exit_at {
            prop_assert_eq!(tr.current_zone, Zone::Stress);
        }
    }

    #[test]
    fn persistence_only_escalates(steps in prop::collection::vec((0.5f64..=1.0, -1.0f64..=-0.3, 1u64..120_000), 1..40)) {
        let cfg = EstimatorConfig::default();
        let ctx = ContextFlags::default();
        let mut tracker = PersistenceTracker::default();
        let mut t = 0;
        let mut seen_persistent = false;
        for (a, v, dt) in steps {
            t += dt;
            let (s, next) = classify(&AvState::new(a, v, t), &ctx, &tracker, &cfg);
            tracker = next;
            match s {
                InteractionState::ElevatedStressPersistent => seen_persistent = true,
                InteractionState::ElevatedStressShort => prop_assert!(!seen_persistent),
                other => prop_assert!(false, "left the stress zone: {other:?}"),
            }
        }
    }
}

#[test]
fn ema_converges_geometrically() {
    let new = AvState::new(-1.0, 1.0, 0);
    for alpha in [0.1, 0.14, 0.35, 0.5, 0.9, 1.0] {
        let mut s = AvState::new(1.0, -1.0, 0);
        for _ in 0..100 {
            s = smooth_av(&s, &new, alpha);
        }
        // exact residual of 100 EMA steps from distance 2
        let bound = 2.0 * (1.0f64 - alpha).powi(100) + 1e-12;
        assert!((s.arousal - new.arousal).abs() <= bound, "alpha {alpha}");
        assert!((s.valence - new.valence).abs() <= bound, "alpha {alpha}");
        if alpha >= 0.14 {
            assert!((s.arousal - new.arousal).abs() < 1e-6, "alpha {alpha}");
        }
    }
}
