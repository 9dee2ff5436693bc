//! Per-connection sessions and the seat registry.
//!
//! This is the synchronous core of the I/O layer: it parses one client frame
//! and decides what should happen, without touching sockets or the engine.

use swarm_core::command::Command;
use swarm_core::protocol::{parse_client, ClientMessage, Role, ServerMessage};
use swarm_core::{PerTeam, Team};

pub type ClientId = u64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub id: ClientId,
    pub role: Option<Role>,
    /// Number of commands this session has forwarded to the engine.
    pub last_command_generation: u64,
}

impl Session {
    pub fn new(id: ClientId) -> Self {
        Self {
            id,
            role: None,
            last_command_generation: 0,
        }
    }
}

/// What the I/O layer should do with one inbound frame.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// Send this message back to the sender only.
    Reply(ServerMessage),
    /// The session joined; reply, start streaming, and tell the engine if a
    /// team seat was filled.
    Joined { reply: ServerMessage, seat: Option<Team> },
    /// Hand the command to the engine for `team`.
    Forward { team: Team, command: Command },
}

#[derive(Debug, Clone)]
pub enum Seat {
    Open,
    Bot,
    Player(ClientId),
}

/// Tracks which client controls each team.
#[derive(Debug, Clone)]
pub struct Registry {
    seats: PerTeam<Seat>,
    config: serde_json::Value,
}

impl Registry {
    /// `bots` marks teams already taken by an in-process bot; `config` is
    /// echoed in every join acknowledgement.
    pub fn new(bots: PerTeam<bool>, config: serde_json::Value) -> Self {
        Self {
            seats: bots.map(|_, b| if *b { Seat::Bot } else { Seat::Open }),
            config,
        }
    }

    pub fn seat(&self, team: Team) -> &Seat {
        self.seats.get(team)
    }

    pub fn handle_message(&mut self, session: &mut Session, text: &str) -> Action {
        let msg = match parse_client(text) {
            Ok(m) => m,
            Err(e) => return error(format!("malformed message: {e}")),
        };
        if let ClientMessage::Join { role } = msg {
            return self.join(session, role);
        }
        let Some(team) = session.role.and_then(Role::team) else {
            return error("only a joined player can send commands".into());
        };
        let command = msg.to_command().expect("non-join messages carry a command");
        session.last_command_generation += 1;
        Action::Forward { team, command }
    }

    fn join(&mut self, session: &mut Session, role: Role) -> Action {
        if session.role.is_some() {
            return error("already joined".into());
        }
        let seat = role.team();
        if let Some(team) = seat {
            let slot = self.seats.get_mut(team);
            if !matches!(slot, Seat::Open) {
                return Action::Reply(ServerMessage::Rejected {
                    reason: "team_taken".into(),
                });
            }
            *slot = Seat::Player(session.id);
        }
        session.role = Some(role);
        Action::Joined {
            reply: ServerMessage::Joined {
                role,
                config: self.config.clone(),
            },
            seat,
        }
    }

    /// Frees the session's seat, returning the team it held.
    pub fn leave(&mut self, session: &Session) -> Option<Team> {
        let team = session.role.and_then(Role::team)?;
        let slot = self.seats.get_mut(team);
        match slot {
            Seat::Player(id) if *id == session.id => {
                *slot = Seat::Open;
                Some(team)
            }
            _ => None,
        }
    }
}

fn error(reason: String) -> Action {
    Action::Reply(ServerMessage::Error { reason })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry() -> Registry {
        Registry::new(PerTeam::new(false, false), serde_json::json!({"agents_per_team": 4}))
    }

    #[test]
    fn join_acknowledges_with_config() {
        let mut reg = registry();
        let mut s = Session::new(1);
        let action = reg.handle_message(&mut s, r#"{"type":"join","role":"red"}"#);
        let Action::Joined { reply, seat } = action else {
            panic!("expected join, got {action:?}");
        };
        assert_eq!(seat, Some(Team::Red));
        assert_eq!(
            reply,
            ServerMessage::Joined {
                role: Role::Red,
                config: serde_json::json!({"agents_per_team": 4})
            }
        );
        assert_eq!(s.role, Some(Role::Red));
    }

    #[test]
    fn second_red_player_is_rejected() {
        let mut reg = registry();
        let (mut a, mut b) = (Session::new(1), Session::new(2));
        reg.handle_message(&mut a, r#"{"type":"join","role":"red"}"#);
        let action = reg.handle_message(&mut b, r#"{"type":"join","role":"red"}"#);
        assert_eq!(
            action,
            Action::Reply(ServerMessage::Rejected {
                reason: "team_taken".into()
            })
        );
        assert_eq!(b.role, None);
    }

    #[test]
    fn bot_seats_are_taken() {
        let mut reg = Registry::new(PerTeam::new(false, true), serde_json::Value::Null);
        let action = reg.handle_message(&mut Session::new(1), r#"{"type":"join","role":"blue"}"#);
        assert!(matches!(action, Action::Reply(ServerMessage::Rejected { .. })));
    }

    #[test]
    fn spectators_are_unlimited() {
        let mut reg = registry();
        for id in 0..5 {
            let action = reg.handle_message(&mut Session::new(id), r#"{"type":"join","role":"spectator"}"#);
            assert!(matches!(action, Action::Joined { seat: None, .. }));
        }
    }

    #[test]
    fn malformed_message_gets_error_and_session_survives() {
        let mut reg = registry();
        let mut s = Session::new(1);
        reg.handle_message(&mut s, r#"{"type":"join","role":"blue"}"#);
        assert!(matches!(
            reg.handle_message(&mut s, "{not json"),
            Action::Reply(ServerMessage::Error { .. })
        ));
        assert_eq!(
            reg.handle_message(&mut s, r#"{"type":"clear"}"#),
            Action::Forward {
                team: Team::Blue,
                command: Command::Clear
            }
        );
        assert_eq!(s.last_command_generation, 1);
    }

    #[test]
    fn spectator_commands_are_refused() {
        let mut reg = registry();
        let mut s = Session::new(1);
        reg.handle_message(&mut s, r#"{"type":"join","role":"spectator"}"#);
        assert!(matches!(
            reg.handle_message(&mut s, r#"{"type":"clear"}"#),
            Action::Reply(ServerMessage::Error { .. })
        ));
    }

    #[test]
    fn leaving_frees_the_seat() {
        let mut reg = registry();
        let mut a = Session::new(1);
        reg.handle_message(&mut a, r#"{"type":"join","role":"red"}"#);
        assert_eq!(reg.leave(&a), Some(Team::Red));
        let action = reg.handle_message(&mut Session::new(2), r#"{"type":"join","role":"red"}"#);
        assert!(matches!(action, Action::Joined { .. }));
    }
}
