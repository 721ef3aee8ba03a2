use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scentctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scentctl")).args(args).env_remove("SCENTCTL_CONFIG").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn synth_then_replay_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("script.csv");
    fs::write(&script, "start_min,duration_min,kind,magnitude\n5,25,stress,1.0\n").unwrap();
    let synth = dir.path().join("synth");
    let out = scentctl(&["--seed", "3", "synth", "--script", p(&script), "--minutes", "60", "--out", p(&synth)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for f in ["rr.csv", "hr.csv", "context.csv", "plan.csv", "events.jsonl", "summary.json"] {
        assert!(synth.join(f).is_file(), "{f}");
    }

    // Replaying the emitted traces reproduces the synth log exactly.
    let replayed = dir.path().join("replayed");
    let out = scentctl(&[
        "--seed",
        "3",
        "replay",
        "--rr",
        p(&synth.join("rr.csv")),
        "--hr",
        p(&synth.join("hr.csv")),
        "--context",
        p(&synth.join("context.csv")),
        "--out",
        p(&replayed),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read(synth.join("events.jsonl")).unwrap(), fs::read(replayed.join("events.jsonl")).unwrap());
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(replayed.join("summary.json")).unwrap()).unwrap();
    assert!(summary["releases"].as_u64().unwrap() >= 1);
    assert_eq!(summary["violation_count"], 0);
}

#[test]
fn replay_without_hr_or_context() {
    let dir = tempfile::tempdir().unwrap();
    let synth = dir.path().join("s");
    assert_eq!(code(&scentctl(&["synth", "--minutes", "30", "--out", p(&synth)])), 0);
    let out = scentctl(&["replay", "--rr", p(&synth.join("rr.csv")), "--out", p(&dir.path().join("r"))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("r/events.jsonl").is_file());
}

#[test]
fn malformed_csv_is_an_input_error_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let rr = dir.path().join("rr.csv");
    fs::write(&rr, "timestamp,rr\n0,800\n800,810\n1610,abc\n").unwrap();
    let out = scentctl(&["replay", "--rr", p(&rr), "--out", p(&dir.path().join("o"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn missing_and_unusable_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = scentctl(&["replay", "--rr", p(&dir.path().join("nope.csv")), "--out", p(dir.path())]);
    assert_eq!(code(&out), 2);

    // Parses fine but is far too short to calibrate.
    let rr = dir.path().join("short.csv");
    fs::write(&rr, "timestamp,rr\n0,800\n800,800\n1600,800\n").unwrap();
    assert_eq!(code(&scentctl(&["replay", "--rr", p(&rr), "--out", p(&dir.path().join("o"))])), 2);

    assert_eq!(code(&scentctl(&["replay"])), 2);
    assert_eq!(code(&scentctl(&["frame", "channel_9"])), 2);
}

#[test]
fn bad_config_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("dup.toml");
    fs::write(&cfg, "[scent.peppermint]\nchannel = 1\n").unwrap();
    let out = scentctl(&["validate", "--config", p(&cfg)]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("assigned to both"), "{}", stderr(&out));

    fs::write(&cfg, "[scheduler]\nmin_interval_s = -5\n").unwrap();
    assert_eq!(code(&scentctl(&["validate", "--config", p(&cfg)])), 3);
    fs::write(&cfg, "[scheduler\n").unwrap();
    assert_eq!(code(&scentctl(&["tables", "--config", p(&cfg)])), 3);
}

#[test]
fn config_is_read_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[scent.peppermint]\nchannel = 1\n").unwrap();
    let out =
        Command::new(env!("CARGO_BIN_EXE_scentctl")).arg("validate").env("SCENTCTL_CONFIG", &cfg).output().unwrap();
    assert_eq!(code(&out), 3);
}

#[test]
fn overlapping_episodes_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("script.csv");
    fs::write(&script, "5,10,stress,0.5\n12,5,fatigue,0.5\n").unwrap();
    let out = scentctl(&["synth", "--script", p(&script), "--minutes", "40", "--out", p(&dir.path().join("o"))]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("overlap"), "{}", stderr(&out));

    fs::write(&script, "5,10,panic,0.5\n").unwrap();
    let out = scentctl(&["synth", "--script", p(&script), "--out", p(&dir.path().join("o"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 1"));
}

#[test]
fn tables_lists_vocabulary_and_mapping() {
    let out = scentctl(&["tables"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let (vocab, mapping) = text.split_once("STATE MAPPING").unwrap();
    // header lines excluded
    assert_eq!(vocab.lines().filter(|l| !l.is_empty()).count(), 2 + 8);
    assert_eq!(mapping.lines().filter(|l| !l.is_empty()).count(), 1 + 6);
    assert!(mapping.contains("elevated_stress_persistent") && mapping.contains("0.80"));
    assert!(vocab.contains("Peppermint"));
    assert_eq!(scentctl(&["tables"]).stdout, text.as_bytes());
}

#[test]
fn tables_follow_channel_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[scent.peppermint]\nchannel = 4\n[scent.tea_tree]\nchannel = 3\n").unwrap();
    let out = scentctl(&["tables", "--config", p(&cfg)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("peppermint(4) tea_tree(3)"), "{text}");
}

#[test]
fn frame_prints_34_pairs() {
    let out = scentctl(&["frame", "power"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 34);
}

#[test]
fn synth_is_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out_dir = dir.path().join(name);
        let out = scentctl(&["--seed", seed, "synth", "--minutes", "45", "--out", p(&out_dir)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        fs::read(out_dir.join("rr.csv")).unwrap()
    };
    let a = run("a", "11");
    assert_eq!(a, run("b", "11"));
    assert_ne!(a, run("c", "12"));
}
