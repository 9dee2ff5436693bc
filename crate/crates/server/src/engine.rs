//! The engine actor.
//!
//! One OS thread owns the [`Match`] and is the only writer of game state. It
//! drains queued inputs at each tick boundary, steps, and publishes
//! pre-serialized messages on a broadcast channel. Publishing never blocks:
//! a receiver that falls behind loses its oldest messages.

use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use tokio::sync::{broadcast, mpsc, oneshot};

use swarm_core::command::Command;
use swarm_core::protocol::ServerMessage;
use swarm_core::runner::{Match, RunOutcome};
use swarm_core::{PerTeam, RunError, Team};

/// Shared, already-serialized outbound frame.
pub type Frame = Arc<str>;

#[derive(Debug)]
pub enum EngineInput {
    Command {
        team: Team,
        command: Command,
        /// Where to report a rejected command.
        reply: mpsc::Sender<Frame>,
    },
    Seated {
        team: Team,
        occupied: bool,
    },
    ClientJoined,
    Stop,
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    /// Wall-clock time per tick.
    pub pace: Duration,
    /// Joined clients required before the first tick, on top of every team
    /// seat being filled.
    pub min_clients: usize,
    pub snapshot_buffer: usize,
}

/// Result of a finished engine run plus its timing trace.
#[derive(Debug, Clone)]
pub struct EngineReport {
    pub outcome: RunOutcome,
    /// Time between consecutive tick starts.
    pub tick_intervals: Vec<Duration>,
    /// Time spent inside each tick (step, serialize, publish).
    pub tick_work: Vec<Duration>,
}

pub struct EngineHandle {
    pub inputs: mpsc::UnboundedSender<EngineInput>,
    pub snapshots: broadcast::Sender<Frame>,
    pub done: oneshot::Receiver<Result<EngineReport, RunError>>,
}

pub fn spawn(game: Match, opts: EngineOptions) -> EngineHandle {
    let (inputs, rx) = mpsc::unbounded_channel();
    let (snapshots, _) = broadcast::channel(opts.snapshot_buffer.max(1));
    let (done_tx, done) = oneshot::channel();
    let publish = snapshots.clone();
    thread::Builder::new()
        .name("engine".into())
        .spawn(move || {
            let result = run(game, rx, publish, opts);
            let _ = done_tx.send(result);
        })
        .expect("spawn engine thread");
    EngineHandle {
        inputs,
        snapshots,
        done,
    }
}

fn frame(msg: &ServerMessage) -> Frame {
    msg.to_json().into()
}

fn run(
    mut game: Match,
    mut rx: mpsc::UnboundedReceiver<EngineInput>,
    publish: broadcast::Sender<Frame>,
    opts: EngineOptions,
) -> Result<EngineReport, RunError> {
    let mut seated = PerTeam::new(game.has_bot(Team::Red), game.has_bot(Team::Blue));
    let mut clients = 0usize;
    let mut started = false;
    let mut tick_intervals = Vec::new();
    let mut tick_work = Vec::new();
    let mut last_start: Option<Instant> = None;
    let mut next = Instant::now();

    while !game.is_done() {
        let mut stop = false;
        loop {
            match rx.try_recv() {
                Ok(EngineInput::Command { team, command, reply }) => {
                    if let Err(e) = game.apply(team, command) {
                        let _ = reply.try_send(frame(&ServerMessage::Error { reason: e.to_string() }));
                    }
                }
                Ok(EngineInput::Seated { team, occupied }) => *seated.get_mut(team) = occupied || game.has_bot(team),
                Ok(EngineInput::ClientJoined) => clients += 1,
                Ok(EngineInput::Stop) | Err(mpsc::error::TryRecvError::Disconnected) => {
                    stop = true;
                    break;
                }
                Err(mpsc::error::TryRecvError::Empty) => break,
            }
        }
        if stop {
            break;
        }
        if !started {
            if seated.red && seated.blue && clients >= opts.min_clients {
                started = true;
                next = Instant::now();
                tracing::info!("all seats filled, starting");
            } else {
                thread::sleep(Duration::from_millis(2));
                continue;
            }
        }

        let start = Instant::now();
        if let Some(prev) = last_start {
            tick_intervals.push(start - prev);
        }
        last_start = Some(start);

        let report = game.step()?;
        let sim = game.sim();
        let generations = PerTeam::new(sim.generation(Team::Red), sim.generation(Team::Blue));
        let _ = publish.send(frame(&ServerMessage::state(
            sim.state(),
            &sim.config().engine,
            generations,
        )));
        for event in &report.events {
            let _ = publish.send(frame(&ServerMessage::from_event(event)));
        }
        tick_work.push(start.elapsed());

        next += opts.pace;
        let now = Instant::now();
        if next > now {
            thread::sleep(next - now);
        } else {
            next = now;
        }
    }

    Ok(EngineReport {
        outcome: game.finish()?,
        tick_intervals,
        tick_work,
    })
}
