//! Controllers, team commands and the engine wired into one steppable match.

use serde::{Deserialize, Serialize};

use crate::command::{ActiveCommand, Command};
use crate::engine::{step_in_place, EngineConfig, GameEvent, GameState};
use crate::ergodic::{
    compute_control, forgetting_factor, target_coeffs, team_coeffs, BasisConfig, Coefficients,
    CoverageCoefficients, ErgodicConfig,
};
use crate::flocking::{flock_control, FlockCommand};
use crate::model::{integrate_agent, spawn_agents, AgentState, DynamicsConfig, PerTeam, Team, Vec2};
use crate::painter::{paint, PainterConfig, TargetDistribution};
use crate::rng::SimRng;
use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Ergodic,
    Flocking,
}

impl std::str::FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ergodic" => Ok(Self::Ergodic),
            "flocking" => Ok(Self::Flocking),
            other => Err(format!("unknown controller `{other}` (expected ergodic|flocking)")),
        }
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Ergodic => "ergodic",
            Self::Flocking => "flocking",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub agents_per_team: usize,
    pub seed: u64,
    pub dynamics: DynamicsConfig,
    pub engine: EngineConfig,
    pub painter: PainterConfig,
    pub ergodic: ErgodicConfig,
    pub controllers: PerTeam<ControllerKind>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            agents_per_team: 10,
            seed: 0,
            dynamics: DynamicsConfig::default(),
            engine: EngineConfig::default(),
            painter: PainterConfig::default(),
            ergodic: ErgodicConfig::default(),
            controllers: PerTeam::splat(ControllerKind::Ergodic),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.agents_per_team == 0 {
            return Err(SimError::InvalidConfig("agents_per_team must be at least 1".into()));
        }
        self.dynamics.validate()?;
        self.engine.validate()?;
        self.painter.validate()?;
        self.ergodic.validate()?;
        if self.painter.grid_size != self.engine.grid_size {
            return Err(SimError::InvalidConfig(
                "painter and capture grids must have the same size".into(),
            ));
        }
        Ok(())
    }
}

/// A team's installed drawing together with its basis projection.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamTarget {
    pub distribution: TargetDistribution,
    pub coeffs: Coefficients,
}

/// Shared ergodic bookkeeping: per-agent coverage and per-team targets.
#[derive(Debug, Clone)]
struct ErgodicBook {
    basis: BasisConfig,
    forgetting: f64,
}

impl ErgodicBook {
    fn new(cfg: &ErgodicConfig, dynamics: &DynamicsConfig) -> Self {
        Self {
            basis: BasisConfig::new(cfg.order),
            forgetting: forgetting_factor(dynamics.dt_control, cfg.coverage_memory),
        }
    }

    fn seed(&self, agents: &[AgentState]) -> Vec<CoverageCoefficients> {
        agents
            .iter()
            .map(|a| CoverageCoefficients::seeded(a.position, &self.basis, self.forgetting))
            .collect()
    }

    fn team_mean(
        &self,
        agents: &[AgentState],
        coverage: &[CoverageCoefficients],
        team: Team,
    ) -> Option<Coefficients> {
        let members: Vec<&Coefficients> = agents
            .iter()
            .zip(coverage)
            .filter(|(a, _)| a.team == team)
            .map(|(_, c)| c.coeffs())
            .collect();
        team_coeffs(&members).ok()
    }
}

/// Per-tick report from [`Simulation::step`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TickReport {
    pub tick: u64,
    pub events: Vec<GameEvent>,
    pub game_over: bool,
}

/// A full two-team match: engine state plus everything the controllers need.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    book: ErgodicBook,
    state: GameState,
    coverage: Vec<CoverageCoefficients>,
    targets: PerTeam<Option<TeamTarget>>,
    flocks: PerTeam<Option<FlockCommand>>,
    generations: PerTeam<u64>,
    held: Vec<Vec2>,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let mut rng = SimRng::new(config.seed);
        let agents = spawn_agents(config.agents_per_team, &mut rng)?;
        Self::with_agents(config, agents)
    }

    /// Starts from explicit agents instead of a seeded spawn.
    pub fn with_agents(config: SimConfig, agents: Vec<AgentState>) -> Result<Self, SimError> {
        config.validate()?;
        let book = ErgodicBook::new(&config.ergodic, &config.dynamics);
        let coverage = book.seed(&agents);
        let held = vec![Vec2::ZERO; agents.len()];
        let state = GameState::new(agents, &config.engine);
        Ok(Self {
            config,
            book,
            state,
            coverage,
            targets: PerTeam::splat(None),
            flocks: PerTeam::splat(None),
            generations: PerTeam::splat(0),
            held,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn basis(&self) -> &BasisConfig {
        &self.book.basis
    }

    pub fn coverage(&self) -> &[CoverageCoefficients] {
        &self.coverage
    }

    pub fn target(&self, team: Team) -> Option<&TeamTarget> {
        self.targets.get(team).as_ref()
    }

    pub fn generation(&self, team: Team) -> u64 {
        *self.generations.get(team)
    }

    pub fn team_coverage(&self, team: Team) -> Option<Coefficients> {
        self.book.team_mean(&self.state.agents, &self.coverage, team)
    }

    /// Installs a command for `team`; takes effect from the next tick.
    pub fn apply_command(&mut self, team: Team, command: &Command) -> Result<(), SimError> {
        let controller = *self.config.controllers.get(team);
        match command {
            Command::Strokes { strokes } => {
                require(controller, ControllerKind::Ergodic, team)?;
                let base = self.targets.get(team).as_ref().map(|t| &t.distribution);
                let dist = paint(strokes, base, &self.config.painter)?;
                self.install_target(team, dist);
            }
            Command::Clear => {
                require(controller, ControllerKind::Ergodic, team)?;
                let dist = TargetDistribution::uniform(self.config.painter.grid_size);
                self.install_target(team, dist);
            }
            Command::Flock(cmd) => {
                require(controller, ControllerKind::Flocking, team)?;
                cmd.validate().map_err(SimError::InvalidCommand)?;
                *self.flocks.get_mut(team) = Some(cmd.clone());
                self.state.commands.get_mut(team).replace(ActiveCommand::Flock(cmd.clone()));
            }
        }
        Ok(())
    }

    fn install_target(&mut self, team: Team, dist: TargetDistribution) {
        let generation = {
            let g = self.generations.get_mut(team);
            *g += 1;
            *g
        };
        let dist = dist.with_generation(generation);
        let coeffs = target_coeffs(&dist, &self.book.basis);
        *self.targets.get_mut(team) = Some(TeamTarget {
            distribution: dist,
            coeffs,
        });
        *self.state.commands.get_mut(team) = Some(ActiveCommand::Target { generation });
    }

    fn refresh_controls(&mut self) -> Result<(), SimError> {
        for (cov, agent) in self.coverage.iter_mut().zip(&self.state.agents) {
            cov.update(agent.position, &self.book.basis);
        }
        let team_c = PerTeam::new(
            self.book.team_mean(&self.state.agents, &self.coverage, Team::Red),
            self.book.team_mean(&self.state.agents, &self.coverage, Team::Blue),
        );
        let agents = &self.state.agents;
        for (i, agent) in agents.iter().enumerate() {
            let team = agent.team;
            let u = match self.config.controllers.get(team) {
                ControllerKind::Ergodic => match (self.targets.get(team), team_c.get(team)) {
                    (Some(target), Some(c)) => compute_control(
                        agent,
                        c,
                        &target.coeffs,
                        &self.book.basis,
                        &self.config.ergodic,
                        &self.config.dynamics,
                    )?,
                    _ => Vec2::ZERO,
                },
                ControllerKind::Flocking => match self.flocks.get(team) {
                    Some(cmd) => {
                        let mates: Vec<&AgentState> = agents
                            .iter()
                            .filter(|m| m.team == team && m.id != agent.id)
                            .collect();
                        flock_control(agent, &mates, cmd, &self.config.dynamics)
                    }
                    None => Vec2::ZERO,
                },
            };
            self.held[i] = u;
        }
        Ok(())
    }

    /// Advances one engine tick, recomputing controls on control ticks and
    /// holding them in between.
    pub fn step(&mut self) -> Result<TickReport, SimError> {
        let tick = self.state.tick;
        if self.state.is_over() {
            return Ok(TickReport {
                tick,
                events: Vec::new(),
                game_over: true,
            });
        }
        if tick.is_multiple_of(self.config.dynamics.ticks_per_control()) {
            self.refresh_controls()?;
        }
        let before = self.state.events.len();
        step_in_place(&mut self.state, &self.held, &self.config.engine, &self.config.dynamics)?;
        Ok(TickReport {
            tick,
            events: self.state.events[before..].to_vec(),
            game_over: self.state.is_over(),
        })
    }
}

fn require(actual: ControllerKind, needed: ControllerKind, team: Team) -> Result<(), SimError> {
    if actual == needed {
        Ok(())
    } else {
        Err(SimError::ControllerMismatch {
            team,
            controller: actual,
        })
    }
}

/// One team moving under its controller with no opponent and no capture
/// rules. Used to study convergence in isolation.
#[derive(Debug, Clone)]
pub struct SwarmRun {
    dynamics: DynamicsConfig,
    ergodic: ErgodicConfig,
    book: ErgodicBook,
    agents: Vec<AgentState>,
    coverage: Vec<CoverageCoefficients>,
    target: Option<Coefficients>,
    flock: Option<FlockCommand>,
    elapsed_ticks: u64,
}

impl SwarmRun {
    pub fn new(
        agents: Vec<AgentState>,
        dynamics: DynamicsConfig,
        ergodic: ErgodicConfig,
    ) -> Result<Self, SimError> {
        dynamics.validate()?;
        ergodic.validate()?;
        if agents.is_empty() {
            return Err(SimError::InvalidConfig("swarm needs at least one agent".into()));
        }
        let book = ErgodicBook::new(&ergodic, &dynamics);
        let coverage = book.seed(&agents);
        Ok(Self {
            dynamics,
            ergodic,
            book,
            agents,
            coverage,
            target: None,
            flock: None,
            elapsed_ticks: 0,
        })
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn basis(&self) -> &BasisConfig {
        &self.book.basis
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed_ticks as f64 * self.dynamics.dt_engine
    }

    pub fn set_target(&mut self, target: &TargetDistribution) {
        self.target = Some(target_coeffs(target, &self.book.basis));
        self.flock = None;
    }

    pub fn set_flock(&mut self, cmd: FlockCommand) {
        self.flock = Some(cmd);
        self.target = None;
    }

    pub fn team_coverage(&self) -> Coefficients {
        let members: Vec<&Coefficients> = self.coverage.iter().map(|c| c.coeffs()).collect();
        team_coeffs(&members).expect("swarm is never empty")
    }

    /// Ergodic metric of the team's coverage against the current target.
    pub fn metric(&self) -> Option<f64> {
        self.target.as_ref().map(|phi| {
            crate::ergodic::ergodic_metric(&self.team_coverage(), phi, &self.book.basis, self.ergodic.q)
        })
    }

    /// One control period: update coverage, compute controls, then hold them
    /// for the engine ticks of that period.
    pub fn step_control(&mut self) -> Result<(), SimError> {
        for (cov, agent) in self.coverage.iter_mut().zip(&self.agents) {
            cov.update(agent.position, &self.book.basis);
        }
        let team_c = self.team_coverage();
        let mut controls = Vec::with_capacity(self.agents.len());
        for agent in &self.agents {
            let u = if let Some(phi) = &self.target {
                compute_control(agent, &team_c, phi, &self.book.basis, &self.ergodic, &self.dynamics)?
            } else if let Some(cmd) = &self.flock {
                let mates: Vec<&AgentState> = self.agents.iter().filter(|m| m.id != agent.id).collect();
                flock_control(agent, &mates, cmd, &self.dynamics)
            } else {
                Vec2::ZERO
            };
            controls.push(u);
        }
        for _ in 0..self.dynamics.ticks_per_control() {
            for (agent, u) in self.agents.iter_mut().zip(&controls) {
                *agent = integrate_agent(agent, *u, self.dynamics.dt_engine, &self.dynamics)?;
            }
            self.elapsed_ticks += 1;
        }
        Ok(())
    }

    /// Runs whole control periods until at least `seconds` have elapsed.
    pub fn run_for(&mut self, seconds: f64) -> Result<(), SimError> {
        let target = self.elapsed() + seconds;
        while self.elapsed() + 1e-9 < target {
            self.step_control()?;
        }
        Ok(())
    }
}
