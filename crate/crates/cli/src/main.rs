//! `scentctl` — replay physiological traces or synthetic sessions through the
//! scent actuation engine.
//!
//! Exit codes: 0 success, 2 input error, 3 config or validation error,
//! 4 internal error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scentctl_core::ir::{encode_frame, DEFAULT_TOLERANCE_US};
use scentctl_core::samples::{parse_samples, write_samples, CsvSample};
use scentctl_core::scent::{expression_for, vocabulary};
use scentctl_core::sim::{generate_session, summarize, EpisodeScript, EventLog, Pipeline, SessionPlan, SessionTraces};
use scentctl_core::{Config, ContextSample, DeviceCommand, HrSample, InteractionState, RrSample};

#[derive(Parser)]
#[command(name = "scentctl", version, about = "HRV-driven scent release engine")]
struct Cli {
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay recorded traces and write the event log and summary.
    Replay {
        #[arg(long)]
        rr: PathBuf,
        /// Heart-rate stream; derived from RR when absent.
        #[arg(long)]
        hr: Option<PathBuf>,
        /// Session context; the session counts as continuous work when absent.
        #[arg(long)]
        context: Option<PathBuf>,
        #[arg(long, env = "SCENTCTL_CONFIG")]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic session, replay it, and write traces, log and summary.
    Synth {
        #[arg(long, env = "SCENTCTL_CONFIG")]
        config: Option<PathBuf>,
        /// Episode script (`start_min,duration_min,kind,magnitude`).
        #[arg(long)]
        script: Option<PathBuf>,
        /// Minimum plan length; defaults to `simulator.session_minutes`.
        #[arg(long)]
        minutes: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the scent vocabulary and the state-to-expression mapping.
    Tables {
        #[arg(long, env = "SCENTCTL_CONFIG")]
        config: Option<PathBuf>,
    },
    /// Check a configuration file and print the effective settings.
    Validate {
        #[arg(long, env = "SCENTCTL_CONFIG")]
        config: Option<PathBuf>,
    },
    /// Print the IR frame for a device command (`power`, `shutdown`, `channel_N`).
    Frame {
        command: String,
        #[arg(long, env = "SCENTCTL_CONFIG")]
        config: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
    fn config(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
    fn internal(message: impl Into<String>) -> Self {
        Self { code: 4, message: message.into() }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::internal(format!("{}: {e}", path.display())))
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<Config> {
    let mut cfg = match path {
        Some(p) => Config::from_toml_str(&read(p)?).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?,
        None => Config::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn load_csv<S: CsvSample>(path: &Path) -> Result<Vec<S>> {
    parse_samples(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Replays, then writes `events.jsonl` and `summary.json` into `out`.
fn run_pipeline(traces: &SessionTraces, cfg: &Config, out: &Path) -> Result<EventLog> {
    let pipeline = Pipeline::new(cfg).map_err(|e| Failure::config(e.to_string()))?;
    let log = pipeline.replay(traces).map_err(|e| Failure::input(format!("replay: {e}")))?;
    let summary = summarize(&log, &cfg.scheduler).map_err(|e| Failure::internal(format!("summary: {e}")))?;
    if summary.violation_count != 0 {
        return Err(Failure::internal(format!("constraint audit found {} violations", summary.violation_count)));
    }
    fs::create_dir_all(out).map_err(|e| Failure::internal(format!("{}: {e}", out.display())))?;
    write(out, "events.jsonl", &log.to_jsonl())?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Failure::internal(e.to_string()))?;
    write(out, "summary.json", &(json + "\n"))?;
    Ok(log)
}

fn replay_cmd(
    seed: Option<u64>,
    rr: &Path,
    hr: Option<&Path>,
    context: Option<&Path>,
    config: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let cfg = load_config(config, seed)?;
    let traces = SessionTraces {
        rr: load_csv::<RrSample>(rr)?,
        hr: hr.map(load_csv::<HrSample>).transpose()?.unwrap_or_default(),
        context: context.map(load_csv::<ContextSample>).transpose()?.unwrap_or_default(),
    };
    let log = run_pipeline(&traces, &cfg, out)?;
    println!("{} records, {} releases -> {}", log.records.len(), log.releases().count(), out.display());
    Ok(())
}

fn synth_cmd(
    seed: Option<u64>,
    config: Option<&Path>,
    script: Option<&Path>,
    minutes: Option<u32>,
    out: &Path,
) -> Result<()> {
    let cfg = load_config(config, seed)?;
    let script = match script {
        Some(p) => EpisodeScript::parse(&read(p)?).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?,
        None => EpisodeScript::default(),
    };
    let plan = SessionPlan::generate(cfg.seed, minutes.unwrap_or(cfg.simulator.session_minutes));
    let traces = generate_session(cfg.seed, &plan, &script, &cfg.simulator, cfg.features.calibration_minutes)
        .map_err(|e| Failure::config(format!("script: {e}")))?;

    fs::create_dir_all(out).map_err(|e| Failure::internal(format!("{}: {e}", out.display())))?;
    write(out, "rr.csv", &write_samples(&traces.rr))?;
    write(out, "hr.csv", &write_samples(&traces.hr))?;
    write(out, "context.csv", &write_samples(&traces.context))?;
    write(out, "plan.csv", &plan.to_csv())?;
    let log = run_pipeline(&traces, &cfg, out)?;
    println!(
        "{} blocks, {} min, {} releases -> {}",
        plan.blocks.len(),
        plan.total_minutes(),
        log.releases().count(),
        out.display()
    );
    Ok(())
}

fn tables(cfg: &Config) -> Result<String> {
    let channels = cfg.channel_map().map_err(|e| Failure::config(e.to_string()))?;
    let mut s = String::new();
    let _ = writeln!(s, "SCENT VOCABULARY");
    let _ = writeln!(s, "{:<3} {:<20} {:<10} {:<32} {:<38} ROLES", "CH", "SCENT", "FAMILY", "SCENE", "QUALITY");
    for scent in vocabulary() {
        let roles: Vec<&str> = scent.roles.iter().map(|r| r.as_str()).collect();
        let _ = writeln!(
            s,
            "{:<3} {:<20} {:<10} {:<32} {:<38} {}",
            channels.channel(scent.id).get(),
            scent.name,
            scent.family,
            scent.scene_metaphor,
            scent.atmospheric_quality,
            roles.join(",")
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "STATE MAPPING");
    let _ = writeln!(
        s,
        "{:<28} {:<9} {:<46} {:<12} {:<23} {:>5} {:>7}",
        "STATE", "PROFILE", "CANDIDATES (CH)", "INTENSITY", "RHYTHM", "DUTY", "BURST_S"
    );
    for state in InteractionState::ALL {
        match expression_for(state) {
            Some(e) => {
                let candidates: Vec<String> =
                    e.candidates.iter().map(|&id| format!("{}({})", id.key(), channels.channel(id))).collect();
                let _ = writeln!(
                    s,
                    "{:<28} {:<9} {:<46} {:<12} {:<23} {:>5.2} {:>7.1}",
                    state.as_str(),
                    e.profile.as_str(),
                    candidates.join(" "),
                    e.intensity.as_str(),
                    e.rhythm.as_str(),
                    cfg.scheduler.duty.get(e.intensity),
                    cfg.scheduler.burst_s.get(e.rhythm).min(cfg.scheduler.max_burst_s),
                );
            }
            None => {
                let _ = writeln!(
                    s,
                    "{:<28} {:<9} {:<46} {:<12} {:<23} {:>5} {:>7}",
                    state.as_str(),
                    "-",
                    "-",
                    "-",
                    "-",
                    "-",
                    "-"
                );
            }
        }
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Replay { rr, hr, context, config, out } => {
            replay_cmd(cli.seed, &rr, hr.as_deref(), context.as_deref(), config.as_deref(), &out)
        }
        Command::Synth { config, script, minutes, out } => {
            synth_cmd(cli.seed, config.as_deref(), script.as_deref(), minutes, &out)
        }
        Command::Tables { config } => {
            print!("{}", tables(&load_config(config.as_deref(), cli.seed)?)?);
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = load_config(config.as_deref(), cli.seed)?;
            let source = config.map_or_else(|| "defaults".to_owned(), |p| p.display().to_string());
            println!("# {source}: ok");
            print!("{}", cfg.to_toml());
            Ok(())
        }
        Command::Frame { command, config } => {
            let cfg = load_config(config.as_deref(), cli.seed)?;
            let cmd = DeviceCommand::parse(&command).ok_or_else(|| {
                Failure::input(format!("unknown command {command:?}; expected power, shutdown or channel_1..channel_8"))
            })?;
            let table = cfg.code_table().map_err(|e| Failure::config(e.to_string()))?;
            println!(
                "# {cmd} code {:#010x} tolerance {} us (default {DEFAULT_TOLERANCE_US})",
                table.code(cmd),
                cfg.ir.tolerance_us
            );
            print!("{}", encode_frame(cmd, &table).to_export());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("scentctl: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
