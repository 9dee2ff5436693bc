//! JSON wire schema for the `/game` websocket. One object per text frame.

use serde::{Deserialize, Serialize};

use crate::command::Command;
use crate::engine::{normalized_field, EngineConfig, EventKind, GameEvent, GameState};
use crate::flocking::{Attractor, FlockCommand};
use crate::model::{PerTeam, Team, Vec2};
use crate::painter::{Brush, Stroke};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Red,
    Blue,
    Spectator,
}

impl Role {
    pub fn team(self) -> Option<Team> {
        match self {
            Role::Red => Some(Team::Red),
            Role::Blue => Some(Team::Blue),
            Role::Spectator => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireStroke {
    pub brush: Brush,
    pub radius: f64,
    pub points: Vec<[f64; 2]>,
}

impl From<&WireStroke> for Stroke {
    fn from(w: &WireStroke) -> Self {
        Stroke::new(w.brush, w.radius, w.points.iter().map(|p| Vec2::new(p[0], p[1])).collect())
    }
}

impl From<&Stroke> for WireStroke {
    fn from(s: &Stroke) -> Self {
        WireStroke {
            brush: s.brush,
            radius: s.radius,
            points: s.points.iter().map(|p| [p.x, p.y]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireAttractor {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Join { role: Role },
    CommandStrokes { strokes: Vec<WireStroke> },
    CommandFlock { attractors: Vec<WireAttractor> },
    Clear,
}

impl ClientMessage {
    /// The simulation command this message carries, if any.
    pub fn to_command(&self) -> Option<Command> {
        match self {
            ClientMessage::Join { .. } => None,
            ClientMessage::CommandStrokes { strokes } => Some(Command::Strokes {
                strokes: strokes.iter().map(Stroke::from).collect(),
            }),
            ClientMessage::CommandFlock { attractors } => Some(Command::Flock(FlockCommand::with_attractors(
                attractors
                    .iter()
                    .map(|a| Attractor {
                        position: Vec2::new(a.x, a.y),
                        weight: a.weight,
                    })
                    .collect(),
            ))),
            ClientMessage::Clear => Some(Command::Clear),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireAgent {
    pub id: u32,
    pub team: Team,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Joined {
        role: Role,
        config: serde_json::Value,
    },
    Rejected {
        reason: String,
    },
    Error {
        reason: String,
    },
    State {
        tick: u64,
        agents: Vec<WireAgent>,
        fields: PerTeam<Vec<f64>>,
        team_sizes: PerTeam<usize>,
        generations: PerTeam<u64>,
    },
    Event {
        kind: String,
        agent: u32,
        from: Team,
        to: Team,
        tick: u64,
    },
    GameOver {
        winner: Team,
        tick: u64,
    },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }

    /// Snapshot of `state` with capture fields normalized per layer.
    ///
    /// `state.tick` counts completed ticks, so the snapshot is labeled with
    /// the last processed tick.
    pub fn state(state: &GameState, cfg: &EngineConfig, generations: PerTeam<u64>) -> Self {
        ServerMessage::State {
            tick: state.tick.saturating_sub(1),
            agents: state
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
                .collect(),
            fields: state.capture.map(|_, f| normalized_field(f, cfg)),
            team_sizes: state.team_sizes(),
            generations,
        }
    }

    pub fn from_event(e: &GameEvent) -> Self {
        match e.kind {
            EventKind::Capture => ServerMessage::Event {
                kind: "capture".into(),
                agent: e.agent_id.unwrap_or_default(),
                from: e.from_team,
                to: e.to_team,
                tick: e.tick,
            },
            EventKind::GameOver => ServerMessage::GameOver {
                winner: e.to_team,
                tick: e.tick,
            },
        }
    }
}

pub fn parse_client(text: &str) -> Result<ClientMessage, serde_json::Error> {
    serde_json::from_str(text)
}
