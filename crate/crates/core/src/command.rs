//! Player commands as the simulation consumes them.

use serde::{Deserialize, Serialize};

use crate::flocking::FlockCommand;
use crate::painter::Stroke;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Command {
    /// Overlay strokes on the team's current drawing.
    Strokes { strokes: Vec<Stroke> },
    Flock(FlockCommand),
    /// Wipe the team's drawing back to an empty canvas.
    Clear,
}

/// What a team's agents are currently following.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActiveCommand {
    Target { generation: u64 },
    Flock(FlockCommand),
}
