//! Scripted players.

use std::f64::consts::TAU;

use crate::command::Command;
use crate::engine::GameState;
use crate::flocking::{Attractor, FlockCommand};
use crate::model::{Team, Vec2};
use crate::painter::{Brush, Stroke};
use crate::sim::ControllerKind;

/// Default spacing between generated commands: 5 s at 30 Hz.
pub const DEFAULT_INTERVAL_TICKS: u64 = 150;

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptEntry {
    pub tick: u64,
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BotPolicy {
    /// Sends an empty canvas once and never changes it.
    UniformCoverage,
    /// Never sends anything.
    Stationary,
    /// Draws an attract ring around the opposing centroid every interval.
    SurroundCentroid { ring_radius: f64, brush_radius: f64 },
    /// Replays commands at their recorded ticks. Entries must be sorted.
    ReplayScript(Vec<ScriptEntry>),
}

impl BotPolicy {
    pub fn surround() -> Self {
        Self::SurroundCentroid {
            ring_radius: 0.15,
            brush_radius: 0.03,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bot {
    policy: BotPolicy,
    team: Team,
    controller: ControllerKind,
    interval_ticks: u64,
    last_emit: Option<u64>,
    cursor: usize,
}

impl Bot {
    pub fn new(policy: BotPolicy, team: Team, controller: ControllerKind) -> Self {
        Self {
            policy,
            team,
            controller,
            interval_ticks: DEFAULT_INTERVAL_TICKS,
            last_emit: None,
            cursor: 0,
        }
    }

    pub fn with_interval(mut self, ticks: u64) -> Self {
        self.interval_ticks = ticks.max(1);
        self
    }

    pub fn team(&self) -> Team {
        self.team
    }

    pub fn policy(&self) -> &BotPolicy {
        &self.policy
    }

    fn due(&self, tick: u64) -> bool {
        self.last_emit.is_none_or(|last| tick >= last + self.interval_ticks)
    }

    /// Commands to apply before `snapshot.tick` is simulated. Empty means no
    /// emission this tick.
    pub fn step(&mut self, snapshot: &GameState) -> Vec<Command> {
        let tick = snapshot.tick;
        match &self.policy {
            BotPolicy::Stationary => Vec::new(),
            BotPolicy::UniformCoverage => {
                if self.last_emit.is_some() {
                    return Vec::new();
                }
                self.last_emit = Some(tick);
                vec![match self.controller {
                    ControllerKind::Ergodic => Command::Strokes { strokes: Vec::new() },
                    ControllerKind::Flocking => Command::Flock(FlockCommand::default()),
                }]
            }
            BotPolicy::SurroundCentroid {
                ring_radius,
                brush_radius,
            } => {
                if !self.due(tick) {
                    return Vec::new();
                }
                let Some(center) = snapshot.centroid(self.team.opponent()) else {
                    return Vec::new();
                };
                self.last_emit = Some(tick);
                match self.controller {
                    ControllerKind::Ergodic => vec![
                        Command::Clear,
                        Command::Strokes {
                            strokes: vec![ring_stroke(center, *ring_radius, *brush_radius)],
                        },
                    ],
                    ControllerKind::Flocking => {
                        let attractors = ring_points(center, *ring_radius, 8)
                            .into_iter()
                            .take(8)
                            .map(|p| Attractor { position: p, weight: 1.0 })
                            .collect();
                        vec![Command::Flock(FlockCommand::with_attractors(attractors))]
                    }
                }
            }
            BotPolicy::ReplayScript(entries) => {
                let mut out = Vec::new();
                while let Some(entry) = entries.get(self.cursor) {
                    if entry.tick > tick {
                        break;
                    }
                    if entry.tick == tick {
                        out.push(entry.command.clone());
                    }
                    self.cursor += 1;
                }
                if !out.is_empty() {
                    self.last_emit = Some(tick);
                }
                out
            }
        }
    }
}

/// Closed polygon approximating a circle, clipped to the arena.
pub fn ring_points(center: Vec2, radius: f64, segments: usize) -> Vec<Vec2> {
    (0..=segments)
        .map(|i| {
            let a = TAU * i as f64 / segments as f64;
            Vec2::new(
                (center.x + radius * a.cos()).clamp(0.0, 1.0),
                (center.y + radius * a.sin()).clamp(0.0, 1.0),
            )
        })
        .collect()
}

pub fn ring_stroke(center: Vec2, radius: f64, brush_radius: f64) -> Stroke {
    Stroke::new(Brush::Attract, brush_radius, ring_points(center, radius, 48))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EngineConfig;
    use crate::model::AgentState;

    fn state_with(blue_at: &[(f64, f64)]) -> GameState {
        let mut agents = vec![AgentState {
            id: 0,
            team: Team::Red,
            position: Vec2::new(0.9, 0.1),
            velocity: Vec2::ZERO,
            altitude: 1.0,
        }];
        for (i, (x, y)) in blue_at.iter().enumerate() {
            agents.push(AgentState {
                id: i as u32 + 1,
                team: Team::Blue,
                position: Vec2::new(*x, *y),
                velocity: Vec2::ZERO,
                altitude: 2.0 + i as f64,
            });
        }
        GameState::new(agents, &EngineConfig::default())
    }

    #[test]
    fn uniform_emits_once() {
        let mut bot = Bot::new(BotPolicy::UniformCoverage, Team::Blue, ControllerKind::Ergodic);
        let mut s = state_with(&[(0.5, 0.5)]);
        assert_eq!(bot.step(&s), vec![Command::Strokes { strokes: vec![] }]);
        for t in 1..400 {
            s.tick = t;
            assert!(bot.step(&s).is_empty());
        }
    }

    #[test]
    fn stationary_is_silent() {
        let mut bot = Bot::new(BotPolicy::Stationary, Team::Red, ControllerKind::Ergodic);
        let mut s = state_with(&[(0.5, 0.5)]);
        for t in 0..1000 {
            s.tick = t;
            assert!(bot.step(&s).is_empty());
        }
    }

    #[test]
    fn surround_refreshes_each_interval() {
        let mut bot = Bot::new(BotPolicy::surround(), Team::Red, ControllerKind::Ergodic);
        let mut s = state_with(&[(0.3, 0.7), (0.32, 0.68)]);
        let mut emissions = vec![];
        for t in 0..400 {
            s.tick = t;
            if !bot.step(&s).is_empty() {
                emissions.push(t);
            }
        }
        assert_eq!(emissions, vec![0, 150, 300]);
    }

    #[test]
    fn replay_emits_at_recorded_ticks() {
        let script = vec![
            ScriptEntry { tick: 2, command: Command::Clear },
            ScriptEntry { tick: 2, command: Command::Strokes { strokes: vec![] } },
            ScriptEntry { tick: 5, command: Command::Clear },
        ];
        let mut bot = Bot::new(BotPolicy::ReplayScript(script), Team::Red, ControllerKind::Ergodic);
        let mut s = state_with(&[(0.5, 0.5)]);
        let mut counts = vec![];
        for t in 0..8 {
            s.tick = t;
            counts.push(bot.step(&s).len());
        }
        assert_eq!(counts, vec![0, 0, 2, 0, 0, 1, 0, 0]);
    }
}
