//! Authoritative game server: an engine thread ticking the match and a
//! websocket endpoint at `/game` speaking the JSON protocol in
//! [`swarm_core::protocol`].

pub mod app;
pub mod engine;
pub mod session;

pub use app::{bind, Server, ServeOptions, ServerError};
pub use engine::EngineReport;
pub use session::{Action, Registry, Session};
