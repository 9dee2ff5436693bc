//! `swarmgame`: serve, headless and replay runs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use tracing_subscriber::EnvFilter;

use swarm_core::config::{Mode, RunConfig};
use swarm_core::runner::{replay, run_headless, RunOutcome};
use swarm_server::{bind, ServeOptions, Server};

const DEFAULT_RECORD: &str = "swarm-run.jsonl";

#[derive(Debug, Parser)]
#[command(name = "swarmgame", version, about = "Swarm-versus-swarm capture game")]
struct Args {
    /// serve | headless | replay
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    agents_per_team: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    max_ticks: Option<String>,
    /// ergodic | flocking
    #[arg(long)]
    red_controller: Option<String>,
    #[arg(long)]
    blue_controller: Option<String>,
    /// uniform | stationary | surround | script:PATH
    #[arg(long)]
    red_bot: Option<String>,
    #[arg(long)]
    blue_bot: Option<String>,
    #[arg(long, env = "SWARM_PORT")]
    port: Option<String>,
    /// Recording output (command log). Event log and metrics go next to it.
    #[arg(long)]
    record: Option<PathBuf>,
    /// Recording to verify in replay mode.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Flat `key = value` config file; flags win over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    metrics_out: Option<PathBuf>,
    /// Any other tunable, as KEY=VALUE. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Args {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let named = [
            ("mode", self.mode.clone()),
            ("agents_per_team", self.agents_per_team.clone()),
            ("seed", self.seed.clone()),
            ("max_ticks", self.max_ticks.clone()),
            ("red_controller", self.red_controller.clone()),
            ("blue_controller", self.blue_controller.clone()),
            ("red_bot", self.red_bot.clone()),
            ("blue_bot", self.blue_bot.clone()),
            ("port", self.port.clone()),
            ("record", path(&self.record)),
            ("replay", path(&self.replay)),
            ("metrics_out", path(&self.metrics_out)),
        ];
        let mut out: Vec<(String, String)> = named
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
            .collect();
        for kv in &self.set {
            let Some((k, v)) = kv.split_once('=') else {
                bail!("--set: expected KEY=VALUE, got `{kv}`");
            };
            out.push((k.trim().to_string(), v.to_string()));
        }
        Ok(out)
    }
}

fn load_config(args: &Args) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_text(&text)
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    }
    let overrides = args.overrides()?;
    cfg.apply_overrides(overrides.iter().map(|(k, v)| (k.as_str(), v.clone())))?;
    cfg.validate()?;
    Ok(cfg)
}

/// `run.jsonl` -> `run.events.jsonl`, `run.metrics.csv`.
fn sibling(record: &Path, suffix: &str) -> PathBuf {
    let stem = record
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = stem.strip_suffix(".jsonl").unwrap_or(&stem);
    record.with_file_name(format!("{stem}{suffix}"))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_artifacts(cfg: &RunConfig, outcome: &RunOutcome, write_recording: bool) -> Result<()> {
    let record = cfg.record.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_RECORD));
    let events = sibling(&record, ".events.jsonl");
    let metrics = cfg.metrics_out.clone().unwrap_or_else(|| sibling(&record, ".metrics.csv"));
    if write_recording {
        write(&record, &outcome.recording)?;
        println!("recording: {}", record.display());
    }
    write(&events, &outcome.event_log)?;
    write(&metrics, &outcome.metrics_csv)?;
    println!("event log: {}", events.display());
    println!("metrics: {}", metrics.display());
    Ok(())
}

fn summarize(outcome: &RunOutcome) {
    let captures = outcome
        .events
        .iter()
        .filter(|e| e.kind == swarm_core::EventKind::Capture)
        .count();
    let winner = outcome.winner.map_or("none".to_string(), |t| t.to_string());
    println!("ticks: {}", outcome.ticks);
    println!("captures: {captures}");
    println!("winner: {winner}");
    println!("hash: {}", outcome.final_hash);
}

async fn serve(cfg: &RunConfig) -> Result<RunOutcome> {
    let listener = bind(cfg.port).await?;
    let server = Server::start(listener, cfg.clone(), ServeOptions::default())?;
    println!("listening on ws://{}/game", server.local_addr());
    let stop = server.stopper();
    tokio::spawn(async move {
        if tokio::signal::ctrl_c().await.is_ok() {
            tracing::info!("interrupted, stopping");
            stop();
        }
    });
    Ok(server.wait().await?.outcome)
}

fn run(args: Args) -> Result<()> {
    let cfg = load_config(&args)?;
    match cfg.mode {
        Mode::Headless => {
            let outcome = run_headless(&cfg)?;
            summarize(&outcome);
            write_artifacts(&cfg, &outcome, true)
        }
        Mode::Replay => {
            let path = cfg.replay.as_ref().expect("validated");
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let outcome = replay(&text)?;
            summarize(&outcome);
            println!("replay verified: final hash matches");
            write_artifacts(&cfg, &outcome, cfg.record.is_some())
        }
        Mode::Serve => {
            let rt = tokio::runtime::Runtime::new()?;
            let outcome = rt.block_on(serve(&cfg))?;
            summarize(&outcome);
            write_artifacts(&cfg, &outcome, true)
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
