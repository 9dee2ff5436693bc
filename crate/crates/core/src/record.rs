//! Line-delimited JSON recordings, event logs and team-size metrics.
//!
//! A recording is a header line carrying the full [`RunConfig`], one line per
//! tick with the commands applied before that tick and every agent's state
//! after it, and an end line with the final state hash.
//!
//! An event log is a start line, one line per capture or game-over event,
//! and an end line with the number of simulated ticks.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bots::ScriptEntry;
use crate::command::Command;
use crate::config::RunConfig;
use crate::engine::{EventKind, GameEvent, GameState};
use crate::model::{PerTeam, Team};
use crate::protocol::WireAgent;
use crate::RecordError;

pub const RECORD_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamCommand {
    pub team: Team,
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RecordLine {
    Header {
        version: u32,
        config: Box<RunConfig>,
    },
    Tick {
        tick: u64,
        commands: Vec<TeamCommand>,
        agents: Vec<WireAgent>,
    },
    End {
        ticks: u64,
        hash: String,
    },
}

pub fn wire_agents(state: &GameState) -> Vec<WireAgent> {
    state
        .agents
        .iter()
        .map(|a| WireAgent {
            id: a.id,
            team: a.team,
            x: a.position.x,
            y: a.position.y,
            vx: a.velocity.x,
            vy: a.velocity.y,
        })
        .collect()
}

/// Accumulates a recording in memory.
#[derive(Debug, Default, Clone)]
pub struct Recorder {
    out: String,
}

impl Recorder {
    pub fn new(config: &RunConfig) -> Self {
        let mut r = Self::default();
        r.push(&RecordLine::Header {
            version: RECORD_VERSION,
            config: Box::new(config.clone()),
        });
        r
    }

    fn push(&mut self, line: &RecordLine) {
        self.out
            .push_str(&serde_json::to_string(line).expect("record lines serialize"));
        self.out.push('\n');
    }

    pub fn tick(&mut self, tick: u64, commands: Vec<TeamCommand>, state: &GameState) {
        self.push(&RecordLine::Tick {
            tick,
            commands,
            agents: wire_agents(state),
        });
    }

    pub fn finish(mut self, state: &GameState) -> String {
        self.push(&RecordLine::End {
            ticks: state.tick,
            hash: state.hash(),
        });
        self.out
    }
}

pub fn parse_record(text: &str) -> Result<Vec<RecordLine>, RecordError> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: RecordLine = serde_json::from_str(raw).map_err(|e| RecordError::Line {
            line: i + 1,
            message: e.to_string(),
        })?;
        if lines.is_empty() && !matches!(line, RecordLine::Header { .. }) {
            return Err(RecordError::Line {
                line: i + 1,
                message: "recording must start with a header".into(),
            });
        }
        lines.push(line);
    }
    if lines.is_empty() {
        return Err(RecordError::Empty);
    }
    Ok(lines)
}

/// Commands a given team issued in a recording, as a bot script.
pub fn load_script(text: &str, team: Team) -> Result<Vec<ScriptEntry>, RecordError> {
    let mut entries = Vec::new();
    let mut last_tick = None;
    for (i, line) in parse_record(text)?.into_iter().enumerate() {
        if let RecordLine::Tick { tick, commands, .. } = line {
            if last_tick.is_some_and(|t| tick < t) {
                return Err(RecordError::Line {
                    line: i + 1,
                    message: format!("tick {tick} is out of order"),
                });
            }
            last_tick = Some(tick);
            entries.extend(
                commands
                    .into_iter()
                    .filter(|c| c.team == team)
                    .map(|c| ScriptEntry { tick, command: c.command }),
            );
        }
    }
    Ok(entries)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventLine {
    Start {
        agents_per_team: usize,
        tick_rate_hz: f64,
    },
    Capture {
        tick: u64,
        agent: u32,
        from: Team,
        to: Team,
    },
    GameOver {
        tick: u64,
        winner: Team,
    },
    End {
        ticks: u64,
    },
}

pub fn event_log(agents_per_team: usize, tick_rate_hz: f64, events: &[GameEvent], ticks: u64) -> String {
    let mut lines = vec![EventLine::Start {
        agents_per_team,
        tick_rate_hz,
    }];
    lines.extend(events.iter().map(|e| match e.kind {
        EventKind::Capture => EventLine::Capture {
            tick: e.tick,
            agent: e.agent_id.unwrap_or_default(),
            from: e.from_team,
            to: e.to_team,
        },
        EventKind::GameOver => EventLine::GameOver {
            tick: e.tick,
            winner: e.to_team,
        },
    }));
    lines.push(EventLine::End { ticks });
    let mut out = String::new();
    for l in &lines {
        out.push_str(&serde_json::to_string(l).expect("event lines serialize"));
        out.push('\n');
    }
    out
}

/// Team sizes after every tick as `time_s,red_count,blue_count` rows.
///
/// Row `t` holds the counts once tick `t` has been processed, so a capture
/// during tick 90 shows up at 3.0 s.
pub fn export_metrics(log: &str) -> Result<String, RecordError> {
    let mut start = None;
    let mut end = None;
    let mut changes: Vec<(u64, Team, Team, usize)> = Vec::new();
    let mut last_tick = 0;
    for (i, raw) in log.lines().enumerate() {
        let lineno = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let bad = |message: String| RecordError::Line { line: lineno, message };
        let line: EventLine = serde_json::from_str(raw).map_err(|e| bad(e.to_string()))?;
        if end.is_some() {
            return Err(bad("record after end of log".into()));
        }
        match line {
            EventLine::Start {
                agents_per_team,
                tick_rate_hz,
            } => {
                if start.is_some() {
                    return Err(bad("duplicate start record".into()));
                }
                if agents_per_team == 0 || !(tick_rate_hz > 0.0) {
                    return Err(bad("start record needs positive team size and tick rate".into()));
                }
                start = Some((agents_per_team, tick_rate_hz));
            }
            other => {
                if start.is_none() {
                    return Err(bad("log must begin with a start record".into()));
                }
                match other {
                    EventLine::Capture { tick, from, to, .. } => {
                        if tick < last_tick {
                            return Err(bad(format!("capture at tick {tick} is out of order")));
                        }
                        if from == to {
                            return Err(bad("capture must change team".into()));
                        }
                        last_tick = tick;
                        changes.push((tick, from, to, lineno));
                    }
                    EventLine::GameOver { tick, .. } => {
                        if tick < last_tick {
                            return Err(bad(format!("game over at tick {tick} is out of order")));
                        }
                        last_tick = tick;
                    }
                    EventLine::End { ticks } => {
                        if ticks < last_tick {
                            return Err(bad(format!("end tick {ticks} precedes the last event")));
                        }
                        end = Some(ticks);
                    }
                    EventLine::Start { .. } => unreachable!(),
                }
            }
        }
    }
    let (n, rate) = start.ok_or(RecordError::Empty)?;
    let ticks = end.ok_or(RecordError::Truncated)?;

    let mut counts = PerTeam::splat(n);
    let mut pending = changes.into_iter().peekable();
    let mut out = String::from("time_s,red_count,blue_count\n");
    for t in 0..ticks {
        while let Some(&(tick, from, to, lineno)) = pending.peek() {
            if tick > t {
                break;
            }
            let c = counts.get_mut(from);
            if *c == 0 {
                return Err(RecordError::Line {
                    line: lineno,
                    message: format!("capture from {from}, which has no agents left"),
                });
            }
            *c -= 1;
            *counts.get_mut(to) += 1;
            pending.next();
        }
        writeln!(out, "{:.6},{},{}", t as f64 / rate, counts.red, counts.blue).unwrap();
    }
    if let Some((_, _, _, lineno)) = pending.next() {
        return Err(RecordError::Line {
            line: lineno,
            message: "event after the final tick".into(),
        });
    }
    Ok(out)
}
