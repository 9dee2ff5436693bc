//! Boids-style baseline: separation, cohesion, alignment and weighted point
//! attractors.

use serde::{Deserialize, Serialize};

use crate::model::{AgentState, DynamicsConfig, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attractor {
    pub position: Vec2,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlockGains {
    pub separation: f64,
    pub cohesion: f64,
    pub alignment: f64,
    /// Pulls each agent's velocity toward zero.
    pub damping: f64,
}

impl Default for FlockGains {
    fn default() -> Self {
        Self {
            separation: 0.01,
            cohesion: 0.3,
            alignment: 0.2,
            damping: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlockCommand {
    pub attractors: Vec<Attractor>,
    pub separation_radius: f64,
    pub cohesion_radius: f64,
    pub gains: FlockGains,
}

impl Default for FlockCommand {
    fn default() -> Self {
        Self {
            attractors: Vec::new(),
            separation_radius: 0.1,
            cohesion_radius: 0.15,
            gains: FlockGains::default(),
        }
    }
}

impl FlockCommand {
    pub fn with_attractors(attractors: Vec<Attractor>) -> Self {
        Self {
            attractors,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.separation_radius > 0.0 && self.cohesion_radius > 0.0) {
            return Err("flocking radii must be positive".into());
        }
        let g = self.gains;
        if [g.separation, g.cohesion, g.alignment, g.damping].iter().any(|w| !(*w >= 0.0)) {
            return Err("flocking gains must be non-negative".into());
        }
        for a in &self.attractors {
            if !(a.weight >= 0.0) || !a.position.is_finite() {
                return Err(format!("invalid attractor {a:?}"));
            }
        }
        Ok(())
    }
}

/// Control for `agent` given the rest of its team.
///
/// Neighbor sums run in a fixed order over sorted contributions so the result
/// does not depend on the order of `teammates`.
pub fn flock_control(
    agent: &AgentState,
    teammates: &[&AgentState],
    cmd: &FlockCommand,
    dynamics: &DynamicsConfig,
) -> Vec2 {
    let p = agent.position;
    let g = cmd.gains;

    let mut away = Vec::new();
    let mut near_pos = Vec::new();
    let mut near_vel = Vec::new();
    for mate in teammates.iter().filter(|m| m.id != agent.id) {
        let offset = p - mate.position;
        let d = offset.norm();
        if d < cmd.separation_radius && d > 0.0 {
            away.push(offset * (1.0 / d));
        }
        if d < cmd.cohesion_radius {
            near_pos.push(mate.position);
            near_vel.push(mate.velocity);
        }
    }

    let mut u = Vec2::ZERO;
    if g.separation > 0.0 && !away.is_empty() {
        u += sorted_sum(&mut away) * g.separation;
    }
    if !near_pos.is_empty() {
        let n = near_pos.len() as f64;
        if g.cohesion > 0.0 {
            let centroid = sorted_sum(&mut near_pos) * (1.0 / n);
            u += (centroid - p) * g.cohesion;
        }
        if g.alignment > 0.0 {
            let mean_v = sorted_sum(&mut near_vel) * (1.0 / n);
            u += (mean_v - agent.velocity) * g.alignment;
        }
    }
    if g.damping > 0.0 {
        u += -agent.velocity * g.damping;
    }
    for a in &cmd.attractors {
        u += (a.position - p) * a.weight;
    }
    u.clamp_norm(dynamics.u_max)
}

fn sorted_sum(items: &mut [Vec2]) -> Vec2 {
    items.sort_unstable_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    items.iter().fold(Vec2::ZERO, |acc, v| acc + *v)
}
