//! Bot-driven matches without a network: headless runs and replay checks.

use crate::bots::{Bot, BotPolicy};
use crate::config::{BotSpec, RunConfig};
use crate::command::Command;
use crate::engine::{GameEvent, GameState};
use crate::model::{PerTeam, Team};
use crate::record::{event_log, export_metrics, parse_record, wire_agents, load_script, RecordLine, Recorder, TeamCommand};
use crate::sim::{Simulation, TickReport};
use crate::{RunError, SimError};

/// Builds the bot for `team`, loading scripts from disk.
pub fn make_bot(spec: &BotSpec, team: Team, cfg: &RunConfig) -> Result<Bot, RunError> {
    let policy = match spec {
        BotSpec::Uniform => BotPolicy::UniformCoverage,
        BotSpec::Stationary => BotPolicy::Stationary,
        BotSpec::Surround => BotPolicy::surround(),
        BotSpec::Script(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?;
            BotPolicy::ReplayScript(load_script(&text, team)?)
        }
    };
    Ok(Bot::new(policy, team, *cfg.sim.controllers.get(team)).with_interval(cfg.bot_interval_ticks))
}

pub fn make_bots(cfg: &RunConfig) -> Result<PerTeam<Option<Bot>>, RunError> {
    let build = |team: Team| -> Result<Option<Bot>, RunError> {
        cfg.bots.get(team).as_ref().map(|spec| make_bot(spec, team, cfg)).transpose()
    };
    Ok(PerTeam::new(build(Team::Red)?, build(Team::Blue)?))
}

/// Everything a headless run produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub ticks: u64,
    pub final_hash: String,
    pub winner: Option<Team>,
    pub events: Vec<GameEvent>,
    pub recording: String,
    pub event_log: String,
    pub metrics_csv: String,
}

fn finish(sim: Simulation, recorder: Recorder, cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let state = sim.state();
    let rate = 1.0 / cfg.sim.dynamics.dt_engine;
    let log = event_log(cfg.sim.agents_per_team, rate, &state.events, state.tick);
    let metrics_csv = export_metrics(&log)?;
    Ok(RunOutcome {
        ticks: state.tick,
        final_hash: state.hash(),
        winner: state.winner,
        events: state.events.clone(),
        recording: recorder.finish(state),
        event_log: log,
        metrics_csv,
    })
}

/// A recorded match: simulation, optional bots and the recorder.
///
/// Commands applied between two steps are recorded against the next tick,
/// so replaying the recording reproduces the match exactly.
#[derive(Debug)]
pub struct Match {
    cfg: RunConfig,
    sim: Simulation,
    bots: PerTeam<Option<Bot>>,
    recorder: Recorder,
    pending: Vec<TeamCommand>,
}

impl Match {
    pub fn new(cfg: RunConfig) -> Result<Self, RunError> {
        let bots = make_bots(&cfg)?;
        let sim = Simulation::new(cfg.sim.clone())?;
        let recorder = Recorder::new(&cfg);
        Ok(Self {
            cfg,
            sim,
            bots,
            recorder,
            pending: Vec::new(),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn sim(&self) -> &Simulation {
        &self.sim
    }

    pub fn state(&self) -> &GameState {
        self.sim.state()
    }

    pub fn has_bot(&self, team: Team) -> bool {
        self.bots.get(team).is_some()
    }

    /// True once the game is over or `max_ticks` have run.
    pub fn is_done(&self) -> bool {
        self.state().is_over() || self.state().tick >= self.cfg.max_ticks
    }

    /// Installs a command from outside (a player). Rejected commands are not
    /// recorded.
    pub fn apply(&mut self, team: Team, command: Command) -> Result<(), SimError> {
        self.sim.apply_command(team, &command)?;
        self.pending.push(TeamCommand { team, command });
        Ok(())
    }

    /// Runs the bots, then one engine tick.
    pub fn step(&mut self) -> Result<TickReport, RunError> {
        let tick = self.sim.state().tick;
        for team in Team::BOTH {
            if let Some(bot) = self.bots.get_mut(team) {
                for command in bot.step(self.sim.state()) {
                    self.sim.apply_command(team, &command)?;
                    self.pending.push(TeamCommand { team, command });
                }
            }
        }
        let report = self.sim.step()?;
        self.recorder.tick(tick, std::mem::take(&mut self.pending), self.sim.state());
        Ok(report)
    }

    pub fn finish(self) -> Result<RunOutcome, RunError> {
        finish(self.sim, self.recorder, &self.cfg)
    }
}

/// Plays bots against each other until game over or `max_ticks`.
pub fn run_headless(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let mut game = Match::new(cfg.clone())?;
    while !game.is_done() {
        game.step()?;
    }
    game.finish()
}

/// Re-simulates a recording, checking every tick's agents and the final hash.
pub fn replay(recording: &str) -> Result<RunOutcome, RunError> {
    let lines = parse_record(recording)?;
    let RecordLine::Header { version, config } = &lines[0] else {
        unreachable!("parse_record guarantees a header");
    };
    if *version != crate::record::RECORD_VERSION {
        return Err(RunError::Replay(format!("unsupported recording version {version}")));
    }
    let cfg = (**config).clone();
    let mut sim = Simulation::new(cfg.sim.clone())?;
    let mut recorder = Recorder::new(&cfg);
    let mut expected_end = None;
    for line in &lines[1..] {
        match line {
            RecordLine::Header { .. } => return Err(RunError::Replay("second header in recording".into())),
            RecordLine::Tick { tick, commands, agents } => {
                if *tick != sim.state().tick {
                    return Err(RunError::Replay(format!(
                        "recording jumps to tick {tick}, simulation is at {}",
                        sim.state().tick
                    )));
                }
                for c in commands {
                    sim.apply_command(c.team, &c.command)?;
                }
                sim.step()?;
                if &wire_agents(sim.state()) != agents {
                    return Err(RunError::Divergence { tick: *tick });
                }
                recorder.tick(*tick, commands.clone(), sim.state());
            }
            RecordLine::End { ticks, hash } => expected_end = Some((*ticks, hash.clone())),
        }
    }
    let outcome = finish(sim, recorder, &cfg)?;
    match expected_end {
        Some((ticks, hash)) if ticks == outcome.ticks && hash == outcome.final_hash => Ok(outcome),
        Some((_, hash)) => Err(RunError::HashMismatch {
            recorded: hash,
            replayed: outcome.final_hash,
        }),
        None => Err(RunError::Replay("recording has no end line".into())),
    }
}
