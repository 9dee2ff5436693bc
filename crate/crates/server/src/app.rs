//! HTTP side: the `/game` websocket and server lifecycle.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc, watch};
use tokio::task::JoinHandle;

use swarm_core::config::RunConfig;
use swarm_core::runner::Match;
use swarm_core::{PerTeam, RunError, Team};

use crate::engine::{self, EngineInput, EngineOptions, EngineReport, Frame};
use crate::session::{Action, Registry, Session};

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("cannot listen on port {port}: {source}")]
    Bind {
        port: u16,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("engine thread exited without a result")]
    EngineLost,
}

#[derive(Debug, Clone)]
pub struct ServeOptions {
    /// Tick period; `None` uses the configured engine timestep.
    pub pace: Option<Duration>,
    pub min_clients: usize,
    /// Broadcast backlog per client before the oldest frames are dropped.
    pub snapshot_buffer: usize,
    /// How long clients keep their connection after the game ends.
    pub linger: Duration,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            pace: None,
            min_clients: 0,
            snapshot_buffer: 64,
            linger: Duration::from_millis(250),
        }
    }
}

/// Binds `0.0.0.0:port` (or an ephemeral port for 0).
pub async fn bind(port: u16) -> Result<TcpListener, ServerError> {
    TcpListener::bind(("0.0.0.0", port))
        .await
        .map_err(|source| ServerError::Bind { port, source })
}

#[derive(Clone)]
struct AppState {
    registry: Arc<Mutex<Registry>>,
    inputs: mpsc::UnboundedSender<EngineInput>,
    snapshots: broadcast::Sender<Frame>,
    next_id: Arc<AtomicU64>,
    shutdown: watch::Receiver<bool>,
}

fn router(state: AppState) -> Router {
    Router::new().route("/game", get(upgrade)).with_state(state)
}

async fn upgrade(ws: WebSocketUpgrade, State(app): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| client(socket, app))
}

async fn next_snapshot(rx: &mut Option<broadcast::Receiver<Frame>>) -> Result<Frame, broadcast::error::RecvError> {
    match rx {
        Some(rx) => rx.recv().await,
        None => std::future::pending().await,
    }
}

async fn client(socket: WebSocket, app: AppState) {
    let mut session = Session::new(app.next_id.fetch_add(1, Ordering::Relaxed));
    let (mut sink, mut stream) = socket.split();
    let (direct_tx, mut direct_rx) = mpsc::channel::<Frame>(16);
    let mut snapshots = None;
    let mut shutdown = app.shutdown.clone();

    loop {
        let out: Frame = tokio::select! {
            frame = stream.next() => match frame {
                Some(Ok(Message::Text(text))) => {
                    let action = app.registry.lock().expect("registry lock").handle_message(&mut session, text.as_str());
                    match action {
                        Action::Reply(msg) => msg.to_json().into(),
                        Action::Joined { reply, seat } => {
                            // Subscribe before the engine can start so no tick is missed.
                            snapshots = Some(app.snapshots.subscribe());
                            if let Some(team) = seat {
                                let _ = app.inputs.send(EngineInput::Seated { team, occupied: true });
                            }
                            let _ = app.inputs.send(EngineInput::ClientJoined);
                            reply.to_json().into()
                        }
                        Action::Forward { team, command } => {
                            let _ = app.inputs.send(EngineInput::Command { team, command, reply: direct_tx.clone() });
                            continue;
                        }
                    }
                }
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                Some(Ok(_)) => continue,
            },
            Some(frame) = direct_rx.recv() => frame,
            snap = next_snapshot(&mut snapshots) => match snap {
                Ok(frame) => frame,
                Err(broadcast::error::RecvError::Lagged(n)) => {
                    tracing::debug!(client = session.id, dropped = n, "slow client");
                    continue;
                }
                Err(broadcast::error::RecvError::Closed) => break,
            },
            _ = async { drop(shutdown.wait_for(|down| *down).await) } => {
                let _ = sink.send(Message::Close(None)).await;
                break;
            }
        };
        if sink.send(Message::Text(out.as_ref().into())).await.is_err() {
            break;
        }
    }

    let freed = app.registry.lock().expect("registry lock").leave(&session);
    if let Some(team) = freed {
        let _ = app.inputs.send(EngineInput::Seated { team, occupied: false });
    }
}

/// A running game server.
pub struct Server {
    addr: SocketAddr,
    inputs: mpsc::UnboundedSender<EngineInput>,
    finished: JoinHandle<Result<EngineReport, ServerError>>,
}

impl Server {
    /// Starts the engine thread and serves `/game` on `listener`.
    pub fn start(listener: TcpListener, cfg: RunConfig, opts: ServeOptions) -> Result<Self, ServerError> {
        let addr = listener.local_addr()?;
        let pace = opts
            .pace
            .unwrap_or_else(|| Duration::from_secs_f64(cfg.sim.dynamics.dt_engine));
        let summary = serde_json::to_value(cfg.summary()).expect("summary serializes");
        let game = Match::new(cfg)?;
        let bots = PerTeam::new(game.has_bot(Team::Red), game.has_bot(Team::Blue));
        let handle = engine::spawn(
            game,
            EngineOptions {
                pace,
                min_clients: opts.min_clients,
                snapshot_buffer: opts.snapshot_buffer,
            },
        );
        let (shutdown, shutdown_rx) = watch::channel(false);
        let state = AppState {
            registry: Arc::new(Mutex::new(Registry::new(bots, summary))),
            inputs: handle.inputs.clone(),
            snapshots: handle.snapshots.clone(),
            next_id: Arc::new(AtomicU64::new(1)),
            shutdown: shutdown_rx,
        };
        let app = router(state);
        let http = tokio::spawn(async move {
            if let Err(e) = axum::serve(listener, app).await {
                tracing::error!("http server stopped: {e}");
            }
        });
        tracing::info!(%addr, "serving /game");
        // When the game ends, give clients a moment to read the final
        // frames, then close every connection.
        let done = handle.done;
        let linger = opts.linger;
        let finished = tokio::spawn(async move {
            let result = done.await.map_err(|_| ServerError::EngineLost);
            tokio::time::sleep(linger).await;
            let _ = shutdown.send(true);
            http.abort();
            Ok(result??)
        });
        Ok(Self {
            addr,
            inputs: handle.inputs,
            finished,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Asks the engine to stop after the current tick.
    pub fn stop(&self) {
        let _ = self.inputs.send(EngineInput::Stop);
    }

    /// A sender that stops the engine, usable after `wait` has taken `self`.
    pub fn stopper(&self) -> impl Fn() + Send + Sync + 'static {
        let inputs = self.inputs.clone();
        move || {
            let _ = inputs.send(EngineInput::Stop);
        }
    }

    /// Waits for the game to end and all connections to be told to close.
    pub async fn wait(self) -> Result<EngineReport, ServerError> {
        self.finished.await.map_err(|_| ServerError::EngineLost)?
    }
}
