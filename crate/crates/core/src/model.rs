//! Agent state, double-integrator dynamics and spawning.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::rng::SimRng;
use crate::ModelError;

/// A point or vector in the unit arena.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rescales the vector so its length does not exceed `max`.
    pub fn clamp_norm(self, max: f64) -> Vec2 {
        let n = self.norm();
        if n > max && n > 0.0 {
            self * (max / n)
        } else {
            self
        }
    }

    pub fn in_unit_box(self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Team {
    Red,
    Blue,
}

impl Team {
    pub const BOTH: [Team; 2] = [Team::Red, Team::Blue];

    pub fn opponent(self) -> Team {
        match self {
            Team::Red => Team::Blue,
            Team::Blue => Team::Red,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Team::Red => 0,
            Team::Blue => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Team::Red => "red",
            Team::Blue => "blue",
        }
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Team {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "red" => Ok(Team::Red),
            "blue" => Ok(Team::Blue),
            other => Err(format!("unknown team `{other}`")),
        }
    }
}

/// A value held once per team, indexed by [`Team`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PerTeam<T> {
    pub red: T,
    pub blue: T,
}

impl<T> PerTeam<T> {
    pub fn new(red: T, blue: T) -> Self {
        Self { red, blue }
    }

    pub fn get(&self, team: Team) -> &T {
        match team {
            Team::Red => &self.red,
            Team::Blue => &self.blue,
        }
    }

    pub fn get_mut(&mut self, team: Team) -> &mut T {
        match team {
            Team::Red => &mut self.red,
            Team::Blue => &mut self.blue,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(Team, &T) -> U) -> PerTeam<U> {
        PerTeam {
            red: f(Team::Red, &self.red),
            blue: f(Team::Blue, &self.blue),
        }
    }
}

impl<T: Clone> PerTeam<T> {
    pub fn splat(value: T) -> Self {
        Self {
            red: value.clone(),
            blue: value,
        }
    }
}

/// One double-integrator agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: u32,
    pub team: Team,
    pub position: Vec2,
    pub velocity: Vec2,
    /// Display-only; never enters the dynamics.
    pub altitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub dt_control: f64,
    pub dt_engine: f64,
    pub v_max: f64,
    pub u_max: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            dt_control: 0.1,
            dt_engine: 1.0 / 30.0,
            v_max: 0.2,
            u_max: 1.0,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("dt_control", self.dt_control)?;
        positive("dt_engine", self.dt_engine)?;
        positive("v_max", self.v_max)?;
        positive("u_max", self.u_max)?;
        let ratio = self.dt_control / self.dt_engine;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(ModelError::InvalidConfig(format!(
                "dt_control ({}) must be a whole multiple of dt_engine ({})",
                self.dt_control, self.dt_engine
            )));
        }
        Ok(())
    }

    /// Engine ticks per control period (3 at the defaults).
    pub fn ticks_per_control(&self) -> u64 {
        (self.dt_control / self.dt_engine).round().max(1.0) as u64
    }
}

/// Advances one agent by a semi-implicit Euler step.
///
/// Velocity is clamped to `v_max` before it moves the agent. A position that
/// leaves the unit box is clamped back onto the wall and the velocity
/// component normal to that wall is zeroed.
pub fn integrate_agent(
    agent: &AgentState,
    u: Vec2,
    dt: f64,
    dynamics: &DynamicsConfig,
) -> Result<AgentState, ModelError> {
    if !u.is_finite() {
        return Err(ModelError::NonFiniteControl { agent: agent.id, u });
    }
    if !(dt > 0.0) {
        return Err(ModelError::InvalidTimestep(dt));
    }
    let mut velocity = (agent.velocity + u * dt).clamp_norm(dynamics.v_max);
    let mut position = agent.position + velocity * dt;
    if position.x < 0.0 || position.x > 1.0 {
        position.x = position.x.clamp(0.0, 1.0);
        velocity.x = 0.0;
    }
    if position.y < 0.0 || position.y > 1.0 {
        position.y = position.y.clamp(0.0, 1.0);
        velocity.y = 0.0;
    }
    Ok(AgentState {
        position,
        velocity,
        ..agent.clone()
    })
}

/// Side length of the square each agent is jittered within at spawn.
pub const SPAWN_BOX: f64 = 0.1;

const RED_CORNERS: [Vec2; 2] = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)];
const BLUE_CORNERS: [Vec2; 2] = [Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];

fn corner_box_point(corner: Vec2, rng: &mut SimRng) -> Vec2 {
    let jx = rng.uniform() * SPAWN_BOX;
    let jy = rng.uniform() * SPAWN_BOX;
    let x = if corner.x > 0.5 { 1.0 - jx } else { jx };
    let y = if corner.y > 0.5 { 1.0 - jy } else { jy };
    Vec2::new(x, y)
}

/// Spawns `n_per_team` agents per team at rest in their home corners.
///
/// Red cycles through the bottom corners starting at (0,0), blue through the
/// top corners starting at (1,1). Red ids are `0..n`, blue ids `n..2n`.
/// Altitudes are a shuffled permutation of `1.0 + 0.1 * i`.
pub fn spawn_agents(n_per_team: usize, rng: &mut SimRng) -> Result<Vec<AgentState>, ModelError> {
    if n_per_team == 0 {
        return Err(ModelError::InvalidConfig(
            "agents per team must be at least 1".into(),
        ));
    }
    let total = 2 * n_per_team;
    let mut altitudes: Vec<f64> = (0..total).map(|i| 1.0 + 0.1 * i as f64).collect();
    rng.shuffle(&mut altitudes);

    let mut agents = Vec::with_capacity(total);
    for (team, corners) in [(Team::Red, RED_CORNERS), (Team::Blue, BLUE_CORNERS)] {
        for i in 0..n_per_team {
            let id = agents.len() as u32;
            let position = corner_box_point(corners[i % corners.len()], rng);
            agents.push(AgentState {
                id,
                team,
                position,
                velocity: Vec2::ZERO,
                altitude: altitudes[id as usize],
            });
        }
    }
    Ok(agents)
}
