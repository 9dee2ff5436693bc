//! Run configuration: a flat `key = value` file plus command-line overrides.
//!
//! Keys use snake_case; the matching flags use kebab-case
//! (`agents_per_team` is `--agents-per-team`). Lines starting with `#` are
//! comments.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{PerTeam, Team};
use crate::sim::SimConfig;
use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Serve,
    Headless,
    Replay,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "serve" => Ok(Mode::Serve),
            "headless" => Ok(Mode::Headless),
            "replay" => Ok(Mode::Replay),
            other => Err(format!("unknown mode `{other}` (expected serve|headless|replay)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BotSpec {
    Uniform,
    Stationary,
    Surround,
    Script(PathBuf),
}

impl FromStr for BotSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(BotSpec::Uniform),
            "stationary" => Ok(BotSpec::Stationary),
            "surround" => Ok(BotSpec::Surround),
            other => match other.strip_prefix("script:") {
                Some(path) if !path.is_empty() => Ok(BotSpec::Script(PathBuf::from(path))),
                _ => Err(format!(
                    "unknown bot `{other}` (expected uniform|stationary|surround|script:PATH)"
                )),
            },
        }
    }
}

impl fmt::Display for BotSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BotSpec::Uniform => f.write_str("uniform"),
            BotSpec::Stationary => f.write_str("stationary"),
            BotSpec::Surround => f.write_str("surround"),
            BotSpec::Script(p) => write!(f, "script:{}", p.display()),
        }
    }
}

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub sim: SimConfig,
    pub max_ticks: u64,
    pub bots: PerTeam<Option<BotSpec>>,
    pub bot_interval_ticks: u64,
    pub port: u16,
    pub record: Option<PathBuf>,
    pub replay: Option<PathBuf>,
    pub metrics_out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Headless,
            sim: SimConfig::default(),
            max_ticks: 3600,
            bots: PerTeam::splat(None),
            bot_interval_ticks: crate::bots::DEFAULT_INTERVAL_TICKS,
            port: DEFAULT_PORT,
            record: None,
            replay: None,
            metrics_out: None,
        }
    }
}

fn parse<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("invalid value `{value}`: {e}"))
}

fn positive(value: &str) -> Result<f64, String> {
    let v: f64 = parse(value)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got `{value}`"))
    }
}

fn unit_open(value: &str) -> Result<f64, String> {
    let v: f64 = parse(value)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("expected a number in (0, 1), got `{value}`"))
    }
}

fn at_least_one(value: &str) -> Result<usize, String> {
    let v: usize = parse(value)?;
    if v >= 1 {
        Ok(v)
    } else {
        Err(format!("expected an integer >= 1, got `{value}`"))
    }
}

/// Every key [`RunConfig::set`] accepts.
pub const KEYS: &[&str] = &[
    "mode",
    "agents_per_team",
    "seed",
    "max_ticks",
    "red_controller",
    "blue_controller",
    "red_bot",
    "blue_bot",
    "bot_interval_ticks",
    "port",
    "record",
    "replay",
    "metrics_out",
    "dt_control",
    "dt_engine",
    "v_max",
    "u_max",
    "grid_size",
    "heat_decay",
    "heat_deposit",
    "capture_threshold",
    "activity_floor",
    "sigma_cells",
    "kernel_truncate",
    "density_floor",
    "basis_order",
    "q",
    "r_x",
    "r_y",
    "horizon",
    "horizon_steps",
    "barrier_alpha",
    "barrier_margin",
    "coverage_memory",
];

impl RunConfig {
    /// Sets one key. The error message does not include location.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        let sim = &mut self.sim;
        match key {
            "mode" => self.mode = parse(value)?,
            "agents_per_team" => sim.agents_per_team = at_least_one(value)?,
            "seed" => sim.seed = parse(value)?,
            "max_ticks" => self.max_ticks = parse(value)?,
            "red_controller" => sim.controllers.red = parse(value)?,
            "blue_controller" => sim.controllers.blue = parse(value)?,
            "red_bot" => self.bots.red = Some(parse(value)?),
            "blue_bot" => self.bots.blue = Some(parse(value)?),
            "bot_interval_ticks" => self.bot_interval_ticks = at_least_one(value)? as u64,
            "port" => self.port = parse(value)?,
            "record" => self.record = Some(PathBuf::from(value)),
            "replay" => self.replay = Some(PathBuf::from(value)),
            "metrics_out" => self.metrics_out = Some(PathBuf::from(value)),
            "dt_control" => sim.dynamics.dt_control = positive(value)?,
            "dt_engine" => sim.dynamics.dt_engine = positive(value)?,
            "v_max" => sim.dynamics.v_max = positive(value)?,
            "u_max" => sim.dynamics.u_max = positive(value)?,
            "grid_size" => {
                let g: usize = parse(value)?;
                if g < 5 {
                    return Err(format!("grid_size must be at least 5, got {g}"));
                }
                sim.engine.grid_size = g;
                sim.painter.grid_size = g;
            }
            "heat_decay" => sim.engine.heat_decay = unit_open(value)?,
            "heat_deposit" => sim.engine.heat_deposit = positive(value)?,
            "capture_threshold" => sim.engine.capture_threshold = unit_open(value)?,
            "activity_floor" => {
                let v: f64 = parse(value)?;
                if !(v >= 0.0) {
                    return Err(format!("activity_floor must be non-negative, got `{value}`"));
                }
                sim.engine.activity_floor = v;
            }
            "sigma_cells" => sim.painter.sigma_cells = positive(value)?,
            "kernel_truncate" => sim.painter.truncate = positive(value)?,
            "density_floor" => sim.painter.floor = positive(value)?,
            "basis_order" => sim.ergodic.order = at_least_one(value)?,
            "q" => sim.ergodic.q = positive(value)?,
            "r_x" => sim.ergodic.r[0][0] = positive(value)?,
            "r_y" => sim.ergodic.r[1][1] = positive(value)?,
            "horizon" => sim.ergodic.horizon = positive(value)?,
            "horizon_steps" => sim.ergodic.horizon_steps = at_least_one(value)?,
            "barrier_alpha" => sim.ergodic.barrier_alpha = positive(value)?,
            "barrier_margin" => {
                let v: f64 = parse(value)?;
                if !(0.0..0.5).contains(&v) {
                    return Err(format!("barrier_margin must lie in [0, 0.5), got `{value}`"));
                }
                sim.ergodic.barrier_margin = v;
            }
            "coverage_memory" => sim.ergodic.coverage_memory = positive(value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Applies a config file's contents on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Line {
                    line,
                    message: format!("expected `key = value`, got `{content}`"),
                });
            };
            self.set(key.trim(), value)
                .map_err(|message| ConfigError::Line { line, message })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Applies `--flag value` style overrides, given as `(key, value)` pairs.
    pub fn apply_overrides<'a>(
        &mut self,
        overrides: impl IntoIterator<Item = (&'a str, String)>,
    ) -> Result<(), ConfigError> {
        for (key, value) in overrides {
            self.set(key, &value).map_err(|message| ConfigError::Flag {
                flag: format!("--{}", key.replace('_', "-")),
                message,
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.sim
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.mode == Mode::Replay && self.replay.is_none() {
            return Err(ConfigError::Invalid("replay mode needs --replay PATH".into()));
        }
        if self.mode == Mode::Headless {
            for team in Team::BOTH {
                if self.bots.get(team).is_none() {
                    return Err(ConfigError::Invalid(format!(
                        "headless mode needs a bot for {team} (--{team}-bot)"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The tunables as a flat map, as sent to clients on join.
    pub fn summary(&self) -> BTreeMap<&'static str, serde_json::Value> {
        let s = &self.sim;
        let mut m = BTreeMap::new();
        m.insert("agents_per_team", s.agents_per_team.into());
        m.insert("grid_size", s.engine.grid_size.into());
        m.insert("dt_engine", s.dynamics.dt_engine.into());
        m.insert("dt_control", s.dynamics.dt_control.into());
        m.insert("v_max", s.dynamics.v_max.into());
        m.insert("capture_threshold", s.engine.capture_threshold.into());
        m.insert("activity_floor", s.engine.activity_floor.into());
        m.insert("red_controller", s.controllers.red.to_string().into());
        m.insert("blue_controller", s.controllers.blue.to_string().into());
        m
    }
}
