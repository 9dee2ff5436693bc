use std::path::PathBuf;

use thiserror::Error;

use crate::model::{Team, Vec2};
use crate::sim::ControllerKind;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("agent {agent} received non-finite control {u:?}")]
    NonFiniteControl { agent: u32, u: Vec2 },
    #[error("timestep must be positive, got {0}")]
    InvalidTimestep(f64),
    #[error("invalid dynamics config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid needs {expected} cells, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("line {line}: cannot parse `{token}` as a number")]
    Parse { line: usize, token: String },
    #[error("line {line}: expected {expected} values, got {got}")]
    Ragged { line: usize, expected: usize, got: usize },
}

#[derive(Debug, Error)]
pub enum PainterError {
    #[error("stroke radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("stroke has no points")]
    EmptyStroke,
    #[error("stroke point {0:?} lies outside the arena")]
    PointOutOfBounds(Vec2),
    #[error("raw layer contains non-finite values")]
    NonFinite,
    #[error("invalid painter config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("team has no members")]
    EmptyTeam,
    #[error("coefficient arrays disagree in order: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite {stage} at step {step} for agent {agent} (position {position:?}, velocity {velocity:?})")]
    NonFinite {
        agent: u32,
        stage: &'static str,
        step: usize,
        position: Vec2,
        velocity: Vec2,
    },
    #[error("invalid ergodic config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("expected {expected} controls, got {got}")]
    ControlCount { expected: usize, got: usize },
    #[error("invalid engine config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid command: {0}")]
    InvalidCommand(String),
    #[error("{team} runs the {controller} controller and cannot take that command")]
    ControllerMismatch { team: Team, controller: ControllerKind },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Painter(#[from] PainterError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{flag}: {message}")]
    Flag { flag: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("log is empty")]
    Empty,
    #[error("log ends without an end record")]
    Truncated,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("replay diverged from the recording at tick {tick}")]
    Divergence { tick: u64 },
    #[error("final state hash {replayed} does not match recorded {recorded}")]
    HashMismatch { recorded: String, replayed: String },
    #[error("replay: {0}")]
    Replay(String),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Sim(#[from] SimError),
}
