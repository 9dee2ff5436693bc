//! Authoritative fixed-step game rules.
//!
//! Every tick: integrate agents, decay and deposit per-team heat, compute each
//! team's capture field from 5x5 neighborhood perimeters, flip every agent
//! standing inside the opposing capture mask, and check for a winner.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::command::ActiveCommand;
use crate::grid::{cell_of, Grid};
use crate::model::{integrate_agent, AgentState, DynamicsConfig, PerTeam, Team, Vec2};
use crate::EngineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub grid_size: usize,
    /// Multiplier applied to every heat cell each tick.
    pub heat_decay: f64,
    pub heat_deposit: f64,
    /// Fraction of the field maximum a cell must exceed to capture.
    pub capture_threshold: f64,
    /// Field maximum at or below which a team captures nothing.
    pub activity_floor: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            grid_size: 50,
            heat_decay: 0.995,
            heat_deposit: 1.0,
            capture_threshold: 0.75,
            activity_floor: 1.0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: &str| Err(EngineError::InvalidConfig(m.to_string()));
        if self.grid_size < NEIGHBORHOOD {
            return bad("grid_size must be at least 5");
        }
        if !(self.heat_decay > 0.0 && self.heat_decay < 1.0) {
            return bad("heat_decay must lie in (0, 1)");
        }
        if !(self.heat_deposit > 0.0) {
            return bad("heat_deposit must be positive");
        }
        if !(self.capture_threshold > 0.0 && self.capture_threshold < 1.0) {
            return bad("capture_threshold must lie in (0, 1)");
        }
        if !(self.activity_floor >= 0.0) {
            return bad("activity_floor must be non-negative");
        }
        Ok(())
    }
}

/// Side of the capture neighborhood.
pub const NEIGHBORHOOD: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Capture,
    GameOver,
}

/// For `GameOver`, `agent_id` is `None`, `from_team` the loser and `to_team`
/// the winner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameEvent {
    pub tick: u64,
    pub kind: EventKind,
    pub agent_id: Option<u32>,
    pub from_team: Team,
    pub to_team: Team,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub tick: u64,
    pub agents: Vec<AgentState>,
    pub heat: PerTeam<Grid>,
    pub capture: PerTeam<Grid>,
    pub commands: PerTeam<Option<ActiveCommand>>,
    pub events: Vec<GameEvent>,
    pub winner: Option<Team>,
}

impl GameState {
    pub fn new(agents: Vec<AgentState>, cfg: &EngineConfig) -> Self {
        let g = cfg.grid_size;
        Self {
            tick: 0,
            agents,
            heat: PerTeam::splat(Grid::zeros(g)),
            capture: PerTeam::splat(Grid::zeros(g)),
            commands: PerTeam::splat(None),
            events: Vec::new(),
            winner: None,
        }
    }

    pub fn team_size(&self, team: Team) -> usize {
        self.agents.iter().filter(|a| a.team == team).count()
    }

    pub fn team_sizes(&self) -> PerTeam<usize> {
        PerTeam::new(self.team_size(Team::Red), self.team_size(Team::Blue))
    }

    pub fn is_over(&self) -> bool {
        self.winner.is_some()
    }

    pub fn members(&self, team: Team) -> impl Iterator<Item = &AgentState> {
        self.agents.iter().filter(move |a| a.team == team)
    }

    pub fn centroid(&self, team: Team) -> Option<Vec2> {
        let n = self.team_size(team);
        if n == 0 {
            return None;
        }
        let sum = self.members(team).fold(Vec2::ZERO, |acc, a| acc + a.position);
        Some(sum * (1.0 / n as f64))
    }

    /// Events emitted while processing `tick`.
    pub fn events_at(&self, tick: u64) -> impl Iterator<Item = &GameEvent> {
        let start = self.events.partition_point(|e| e.tick < tick);
        self.events[start..].iter().take_while(move |e| e.tick == tick)
    }

    /// SHA-256 over the exact bit patterns of the whole state.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.tick.to_le_bytes());
        h.update([match self.winner {
            None => 0u8,
            Some(Team::Red) => 1,
            Some(Team::Blue) => 2,
        }]);
        h.update((self.agents.len() as u64).to_le_bytes());
        for a in &self.agents {
            h.update(a.id.to_le_bytes());
            h.update([a.team.index() as u8]);
            for v in [a.position.x, a.position.y, a.velocity.x, a.velocity.y, a.altitude] {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        for team in Team::BOTH {
            for v in self.heat.get(team).cells() {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        for cmd in [&self.commands.red, &self.commands.blue] {
            h.update(serde_json::to_vec(cmd).expect("commands serialize"));
        }
        for e in &self.events {
            h.update(e.tick.to_le_bytes());
            h.update([e.kind as u8, e.from_team.index() as u8, e.to_team.index() as u8]);
            h.update(e.agent_id.map_or(u64::MAX, u64::from).to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Decays both heat layers, then credits each agent's cell to its current team.
pub fn deposit_heat(heat: &mut PerTeam<Grid>, agents: &[AgentState], cfg: &EngineConfig) {
    for team in Team::BOTH {
        heat.get_mut(team).scale(cfg.heat_decay);
    }
    for a in agents {
        let layer = heat.get_mut(a.team);
        let (ix, iy) = cell_of(layer.size(), a.position);
        layer.add(ix, iy, cfg.heat_deposit);
    }
}

/// Offsets of the 16 perimeter cells of a 5x5 neighborhood, row-major.
pub fn perimeter_offsets() -> impl Iterator<Item = (isize, isize)> {
    let r = (NEIGHBORHOOD / 2) as isize;
    (-r..=r).flat_map(move |dy| {
        (-r..=r)
            .filter(move |&dx| dx.abs() == r || dy.abs() == r)
            .map(move |dx| (dx, dy))
    })
}

/// Mean heat over the in-bounds perimeter cells of the 5x5 neighborhood
/// centered on each cell.
pub fn compute_capture_field(heat: &Grid) -> Grid {
    let g = heat.size();
    let offsets: Vec<(isize, isize)> = perimeter_offsets().collect();
    let mut out = Grid::zeros(g);
    for iy in 0..g {
        for ix in 0..g {
            let mut sum = 0.0;
            let mut count = 0u32;
            for &(dx, dy) in &offsets {
                let (x, y) = (ix as isize + dx, iy as isize + dy);
                if x >= 0 && y >= 0 && (x as usize) < g && (y as usize) < g {
                    sum += heat.get(x as usize, y as usize);
                    count += 1;
                }
            }
            out.set(ix, iy, sum / count as f64);
        }
    }
    out
}

/// Cells whose capture value exceeds `threshold * max`, or nothing when the
/// field maximum does not exceed the activity floor.
pub fn capture_mask(field: &Grid, cfg: &EngineConfig) -> Vec<bool> {
    let max = field.max();
    if !(max > cfg.activity_floor) {
        return vec![false; field.cells().len()];
    }
    let cut = cfg.capture_threshold * max;
    field.cells().iter().map(|&v| v > cut).collect()
}

/// Capture field scaled into `[0, 1]` by its own maximum, all zero when
/// the team is below the activity floor.
pub fn normalized_field(field: &Grid, cfg: &EngineConfig) -> Vec<f64> {
    let max = field.max();
    if !(max > cfg.activity_floor) {
        return vec![0.0; field.cells().len()];
    }
    field.cells().iter().map(|v| v / max).collect()
}

/// Flips every agent standing in the opposing team's capture mask.
///
/// All agents are tested against the same masks before anyone flips, so
/// mutual captures both fire and iteration order is irrelevant.
pub fn resolve_captures(state: &mut GameState, cfg: &EngineConfig) {
    if state.is_over() {
        return;
    }
    let masks = state.capture.map(|_, field| capture_mask(field, cfg));
    let g = cfg.grid_size;
    let flips: Vec<usize> = state
        .agents
        .iter()
        .enumerate()
        .filter(|(_, a)| {
            let (ix, iy) = cell_of(g, a.position);
            masks.get(a.team.opponent())[iy * g + ix]
        })
        .map(|(i, _)| i)
        .collect();
    for i in flips {
        let agent = &mut state.agents[i];
        let from = agent.team;
        agent.team = from.opponent();
        state.events.push(GameEvent {
            tick: state.tick,
            kind: EventKind::Capture,
            agent_id: Some(agent.id),
            from_team: from,
            to_team: agent.team,
        });
    }
    for team in Team::BOTH {
        if state.team_size(team) == 0 {
            state.winner = Some(team.opponent());
            state.events.push(GameEvent {
                tick: state.tick,
                kind: EventKind::GameOver,
                agent_id: None,
                from_team: team,
                to_team: team.opponent(),
            });
            break;
        }
    }
}

/// One engine tick. `controls[i]` drives `state.agents[i]`.
pub fn engine_tick(
    state: &GameState,
    controls: &[Vec2],
    cfg: &EngineConfig,
    dynamics: &DynamicsConfig,
) -> Result<GameState, EngineError> {
    let mut next = state.clone();
    step_in_place(&mut next, controls, cfg, dynamics)?;
    Ok(next)
}

/// [`engine_tick`] without the copy. A finished game is left untouched.
pub fn step_in_place(
    state: &mut GameState,
    controls: &[Vec2],
    cfg: &EngineConfig,
    dynamics: &DynamicsConfig,
) -> Result<(), EngineError> {
    if state.is_over() {
        return Ok(());
    }
    if controls.len() != state.agents.len() {
        return Err(EngineError::ControlCount {
            expected: state.agents.len(),
            got: controls.len(),
        });
    }
    let moved = state
        .agents
        .iter()
        .zip(controls)
        .map(|(a, u)| integrate_agent(a, *u, dynamics.dt_engine, dynamics))
        .collect::<Result<Vec<_>, _>>()?;
    state.agents = moved;
    deposit_heat(&mut state.heat, &state.agents, cfg);
    state.capture = state.heat.map(|_, layer| compute_capture_field(layer));
    resolve_captures(state, cfg);
    state.tick += 1;
    Ok(())
}
