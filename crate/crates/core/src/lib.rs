//! Swarm-versus-swarm capture game.
//!
//! Two teams of double-integrator agents share the unit square. Each team
//! leaves a decaying heat trail; cells ringed by a team's trail capture
//! opposing agents that wander in. Players steer their swarm by painting
//! target densities that a decentralized ergodic controller turns into
//! per-agent accelerations, or with a flocking baseline.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bots;
pub mod command;
pub mod config;
pub mod engine;
pub mod ergodic;
pub mod flocking;
pub mod grid;
pub mod model;
pub mod painter;
pub mod protocol;
pub mod record;
pub mod rng;
pub mod runner;
pub mod sim;

mod error;

pub use error::{
    ConfigError, ControlError, EngineError, GridError, ModelError, PainterError, RecordError, RunError,
    SimError,
};

pub use command::{ActiveCommand, Command};
pub use engine::{EngineConfig, EventKind, GameEvent, GameState};
pub use model::{AgentState, DynamicsConfig, PerTeam, Team, Vec2};
pub use painter::{Brush, PainterConfig, Stroke, TargetDistribution};
pub use rng::SimRng;
pub use sim::{ControllerKind, SimConfig, Simulation};
