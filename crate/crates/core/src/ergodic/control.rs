use serde::{Deserialize, Serialize};

use super::basis::{AxisTables, BasisConfig, Coefficients};
use crate::model::{integrate_agent, AgentState, DynamicsConfig, Vec2};
use crate::ControlError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicConfig {
    /// Modes per axis.
    pub order: usize,
    /// Metric weight `q`.
    pub q: f64,
    /// Symmetric control weight `R`, row-major 2x2.
    pub r: [[f64; 2]; 2],
    /// Receding horizon length in seconds.
    pub horizon: f64,
    pub horizon_steps: usize,
    pub barrier_alpha: f64,
    pub barrier_margin: f64,
    /// Time constant of the coverage forgetting, seconds.
    pub coverage_memory: f64,
}

impl Default for ErgodicConfig {
    fn default() -> Self {
        Self {
            order: 8,
            q: 1.0,
            r: [[0.01, 0.0], [0.0, 0.01]],
            horizon: 0.5,
            horizon_steps: 10,
            barrier_alpha: 100.0,
            barrier_margin: 0.02,
            coverage_memory: 20.0,
        }
    }
}

impl ErgodicConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        let bad = |m: String| Err(ControlError::InvalidConfig(m));
        if self.order == 0 {
            return bad("basis order must be at least 1".into());
        }
        if !(self.q > 0.0) {
            return bad(format!("q must be positive, got {}", self.q));
        }
        let [[a, b], [c, d]] = self.r;
        if b != c {
            return bad("R must be symmetric".into());
        }
        if !(a > 0.0 && a * d - b * c > 0.0) {
            return bad("R must be positive definite".into());
        }
        if !(self.horizon > 0.0) || self.horizon_steps == 0 {
            return bad("horizon and horizon_steps must be positive".into());
        }
        if !(self.barrier_alpha > 0.0) || !(0.0..0.5).contains(&self.barrier_margin) {
            return bad("barrier alpha must be positive and margin in [0, 0.5)".into());
        }
        if !(self.coverage_memory > 0.0) {
            return bad("coverage memory must be positive".into());
        }
        Ok(())
    }

    pub fn r_inverse(&self) -> [[f64; 2]; 2] {
        let [[a, b], [c, d]] = self.r;
        let det = a * d - b * c;
        [[d / det, -b / det], [-c / det, a / det]]
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.horizon_steps as f64
    }
}

/// `q * sum_k Lambda_k (c_k - phi_k)^2`.
pub fn ergodic_metric(c: &Coefficients, phi: &Coefficients, basis: &BasisConfig, q: f64) -> f64 {
    assert_eq!(c.order(), phi.order(), "coefficient arrays differ in shape");
    c.values()
        .iter()
        .zip(phi.values())
        .zip(basis.weights())
        .map(|((ck, pk), lam)| lam * (ck - pk) * (ck - pk))
        .sum::<f64>()
        * q
}

/// Wall barrier `sum_j exp(a (s_j - (1 - m))) + exp(a (m - s_j))`.
pub fn barrier(s: Vec2, alpha: f64, margin: f64) -> f64 {
    let axis = |v: f64| (alpha * (v - (1.0 - margin))).exp() + (alpha * (margin - v)).exp();
    axis(s.x) + axis(s.y)
}

pub fn barrier_grad(s: Vec2, alpha: f64, margin: f64) -> Vec2 {
    let axis = |v: f64| alpha * ((alpha * (v - (1.0 - margin))).exp() - (alpha * (margin - v)).exp());
    Vec2::new(axis(s.x), axis(s.y))
}

/// Running-cost pieces shared by the costate and the horizon cost.
struct RunningCost<'a> {
    /// `2 q w Lambda_k (c_k - phi_k)`, the sensitivity of the metric to one
    /// more trajectory sample at mode k.
    source: Vec<f64>,
    basis: &'a BasisConfig,
    tables: AxisTables,
    alpha: f64,
    margin: f64,
}

impl<'a> RunningCost<'a> {
    fn new(
        team_c: &Coefficients,
        phi: &Coefficients,
        basis: &'a BasisConfig,
        cfg: &ErgodicConfig,
        injection_weight: f64,
    ) -> Result<Self, ControlError> {
        if team_c.order() != basis.order() || phi.order() != basis.order() {
            return Err(ControlError::ShapeMismatch {
                expected: basis.order(),
                got: if team_c.order() != basis.order() { team_c.order() } else { phi.order() },
            });
        }
        let source = team_c
            .values()
            .iter()
            .zip(phi.values())
            .zip(basis.weights())
            .map(|((c, p), lam)| 2.0 * cfg.q * injection_weight * lam * (c - p))
            .collect();
        Ok(Self {
            source,
            basis,
            tables: AxisTables::new(basis.order()),
            alpha: cfg.barrier_alpha,
            margin: cfg.barrier_margin,
        })
    }

    fn value(&mut self, s: Vec2) -> f64 {
        self.tables.fill(s);
        self.tables.weighted_value(&self.source, self.basis) + barrier(s, self.alpha, self.margin)
    }

    fn grad(&mut self, s: Vec2) -> Vec2 {
        self.tables.fill(s);
        self.tables.weighted_grad(&self.source, self.basis) + barrier_grad(s, self.alpha, self.margin)
    }
}

fn rollout(
    agent: &AgentState,
    first_control: Vec2,
    apply_steps: usize,
    cfg: &ErgodicConfig,
    dynamics: &DynamicsConfig,
) -> Result<Vec<AgentState>, ControlError> {
    let h = cfg.step();
    let mut states = Vec::with_capacity(cfg.horizon_steps + 1);
    states.push(agent.clone());
    for j in 0..cfg.horizon_steps {
        let u = if j < apply_steps { first_control } else { Vec2::ZERO };
        let next = integrate_agent(&states[j], u, h, dynamics).map_err(ControlError::Model)?;
        states.push(next);
    }
    Ok(states)
}

fn non_finite(agent: &AgentState, stage: &'static str, step: usize) -> ControlError {
    ControlError::NonFinite {
        agent: agent.id,
        stage,
        step,
        position: agent.position,
        velocity: agent.velocity,
    }
}

/// Costate `(rho_p, rho_v)` at every rollout node `0..=horizon_steps`.
///
/// Rolls the agent forward over the horizon with zero control, then
/// integrates backward from zero with explicit Euler steps
///
/// ```text
/// rho_p[j-1] = rho_p[j] + h * grad l(p[j])
/// rho_v[j-1] = rho_v[j] + h * rho_p[j]
/// ```
///
/// where `l` is the metric sensitivity plus the wall barrier. The coverage
/// injection weight is `1 - exp(-dt_control / coverage_memory)`.
pub fn costate(
    agent: &AgentState,
    team_c: &Coefficients,
    phi: &Coefficients,
    basis: &BasisConfig,
    cfg: &ErgodicConfig,
    dynamics: &DynamicsConfig,
) -> Result<Vec<(Vec2, Vec2)>, ControlError> {
    let w = 1.0 - super::coverage::forgetting_factor(dynamics.dt_control, cfg.coverage_memory);
    let mut cost = RunningCost::new(team_c, phi, basis, cfg, w)?;
    let states = rollout(agent, Vec2::ZERO, 0, cfg, dynamics)?;
    let h = cfg.step();

    let mut out = vec![(Vec2::ZERO, Vec2::ZERO); states.len()];
    let mut rho_p = Vec2::ZERO;
    let mut rho_v = Vec2::ZERO;
    for j in (1..states.len()).rev() {
        let g = cost.grad(states[j].position);
        let next_v = rho_v + rho_p * h;
        rho_p += g * h;
        rho_v = next_v;
        if !(rho_p.is_finite() && rho_v.is_finite()) {
            return Err(non_finite(agent, "costate", j));
        }
        out[j - 1] = (rho_p, rho_v);
    }
    Ok(out)
}

/// Receding-horizon ergodic control for one agent: `-R^-1 rho_v[0]` from
/// [`costate`], clamped to `u_max`.
pub fn compute_control(
    agent: &AgentState,
    team_c: &Coefficients,
    phi: &Coefficients,
    basis: &BasisConfig,
    cfg: &ErgodicConfig,
    dynamics: &DynamicsConfig,
) -> Result<Vec2, ControlError> {
    let rho = costate(agent, team_c, phi, basis, cfg, dynamics)?;
    let rho_v = rho[0].1;
    let ri = cfg.r_inverse();
    let u = Vec2::new(
        -(ri[0][0] * rho_v.x + ri[0][1] * rho_v.y),
        -(ri[1][0] * rho_v.x + ri[1][1] * rho_v.y),
    );
    if !u.is_finite() {
        return Err(non_finite(agent, "control", 0));
    }
    Ok(u.clamp_norm(dynamics.u_max))
}

fn effort(u: Vec2, cfg: &ErgodicConfig) -> f64 {
    let [[a, b], [c, d]] = cfg.r;
    0.5 * (u.x * (a * u.x + b * u.y) + u.y * (c * u.x + d * u.y))
}

/// First-order objective for holding `u` over the first control period:
/// the mode-insertion sensitivity `rho_v . u` plus `1/2 |u|_R^2`, summed
/// over the costate nodes that fall inside that period.
pub fn insertion_cost(rho: &[(Vec2, Vec2)], u: Vec2, cfg: &ErgodicConfig, dynamics: &DynamicsConfig) -> f64 {
    let h = cfg.step();
    let apply_steps = ((dynamics.dt_control / h).round() as usize).clamp(1, rho.len());
    rho[..apply_steps]
        .iter()
        .map(|(_, rho_v)| h * (rho_v.dot(u) + effort(u, cfg)))
        .sum()
}

/// Horizon objective for holding `u` over the first control period and then
/// coasting: running cost summed along the rollout plus `1/2 |u|_R^2 dt_control`.
pub fn horizon_cost(
    agent: &AgentState,
    u: Vec2,
    team_c: &Coefficients,
    phi: &Coefficients,
    basis: &BasisConfig,
    cfg: &ErgodicConfig,
    dynamics: &DynamicsConfig,
) -> Result<f64, ControlError> {
    let w = 1.0 - super::coverage::forgetting_factor(dynamics.dt_control, cfg.coverage_memory);
    let mut cost = RunningCost::new(team_c, phi, basis, cfg, w)?;
    let h = cfg.step();
    let apply_steps = ((dynamics.dt_control / h).round() as usize).max(1);
    let states = rollout(agent, u, apply_steps, cfg, dynamics)?;
    let running: f64 = states[1..].iter().map(|s| h * cost.value(s.position)).sum();
    Ok(running + effort(u, cfg) * dynamics.dt_control)
}
