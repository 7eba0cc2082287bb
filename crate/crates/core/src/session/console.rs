//! Operator console: a message-driven session owner plus a WebSocket server
//! that feeds it one connection at a time.

use std::net::{SocketAddr, TcpListener, ToSocketAddrs};
use std::path::PathBuf;
use std::sync::Arc;

use tungstenite::{Message, WebSocket};

use super::log::write_log;
use super::online::session_log_path;
use super::protocol::{ClientMessage, DecodeResult, Envelope, SceneUpdate, ServerMessage, SummaryView};
use super::{ExperimentRunner, NavSession, OnlineConfig, VirtualSubject};
use crate::error::Error;
use crate::scu::ScuModel;
use crate::signal::StimulusClass;
use crate::simworld::World;

/// Applies client messages strictly in arrival order, between trials.
#[derive(Debug)]
pub struct ConsoleSession {
    world: World,
    model: Arc<ScuModel<f32>>,
    subject: VirtualSubject,
    config: OnlineConfig,
    out_dir: Option<PathBuf>,
    runner: Option<ExperimentRunner>,
    next_experiment: u32,
    paused: bool,
    last_client_seq: Option<u64>,
    server_seq: u64,
    finished: Vec<NavSession>,
}

impl ConsoleSession {
    /// Experiments are numbered from `config.experiment`; finished ones are
    /// logged to `out_dir/sessionN.log` when a directory is given.
    pub fn new(
        world: &World,
        model: Arc<ScuModel<f32>>,
        subject: &VirtualSubject,
        config: &OnlineConfig,
        out_dir: Option<PathBuf>,
    ) -> Result<Self, Error> {
        ExperimentRunner::new(world, model.clone(), subject, config)?;
        if let Some(dir) = &out_dir {
            std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                path: dir.clone(),
                source,
            })?;
        }
        Ok(Self {
            world: world.clone(),
            model,
            subject: subject.clone(),
            config: config.clone(),
            out_dir,
            runner: None,
            next_experiment: config.experiment,
            paused: false,
            last_client_seq: None,
            server_seq: 0,
            finished: Vec::new(),
        })
    }

    pub fn runner(&self) -> Option<&ExperimentRunner> {
        self.runner.as_ref()
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    /// Experiments that have ended, in order.
    pub fn finished(&self) -> &[NavSession] {
        &self.finished
    }

    /// Called when an operator connects: client sequence numbering restarts
    /// and the current scene, if any, is sent.
    pub fn connect(&mut self) -> Vec<Envelope> {
        self.last_client_seq = None;
        let scene = self.scene();
        self.wrap(scene.into_iter().collect())
    }

    /// Called when the operator goes away; the experiment waits for `resume`.
    pub fn disconnect(&mut self) {
        if self.runner.is_some() {
            self.paused = true;
        }
    }

    /// Parses one text frame and returns the reply envelopes.
    pub fn handle_text(&mut self, text: &str) -> Vec<Envelope> {
        let env: Envelope = match serde_json::from_str(text) {
            Ok(e) => e,
            Err(e) => return self.wrap(vec![ServerMessage::error("malformed", e.to_string())]),
        };
        if let Some(last) = self.last_client_seq {
            if env.seq <= last {
                let msg = format!("seq {} does not follow {last}", env.seq);
                return self.wrap(vec![ServerMessage::error("bad_seq", msg)]);
            }
        }
        self.last_client_seq = Some(env.seq);
        if !ClientMessage::TYPES.contains(&env.kind.as_str()) {
            let msg = format!("unknown message type {:?}", env.kind);
            return self.wrap(vec![ServerMessage::error("unknown_type", msg)]);
        }
        let replies = match ClientMessage::from_envelope(&env) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![ServerMessage::error("bad_payload", e.to_string())],
        };
        self.wrap(replies)
    }

    /// Error reply that does not touch the session.
    pub fn reject(&mut self, code: &str, message: &str) -> Vec<Envelope> {
        self.wrap(vec![ServerMessage::error(code, message)])
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        match msg {
            ClientMessage::Start { plan_id } => {
                if plan_id != self.world.plan.id {
                    return vec![ServerMessage::error("unknown_plan", format!("no plan {plan_id:?}"))];
                }
                if self.runner.as_ref().is_some_and(|r| r.is_running()) {
                    return vec![ServerMessage::error("session_active", "an experiment is already running")];
                }
                self.begin()
            }
            ClientMessage::Reset => {
                if self.runner.is_none() {
                    return vec![not_started()];
                }
                self.end_current();
                self.begin()
            }
            ClientMessage::Pause | ClientMessage::Resume => {
                if self.runner.is_none() {
                    return vec![not_started()];
                }
                self.paused = msg == ClientMessage::Pause;
                self.scene().into_iter().collect()
            }
            ClientMessage::Fixate { freq_hz } => self.fixate(freq_hz),
        }
    }

    fn fixate(&mut self, freq_hz: u32) -> Vec<ServerMessage> {
        let Some(runner) = self.runner.as_mut().filter(|r| r.is_running()) else {
            return vec![not_started()];
        };
        if self.paused {
            return vec![ServerMessage::error("paused", "session is paused")];
        }
        let class = StimulusClass::from_frequency_hz(freq_hz as f64)
            .filter(|c| runner.displayed().iter().any(|d| d.freq_hz == c.frequency_hz()));
        let Some(class) = class else {
            return vec![ServerMessage::error(
                "no_such_stimulus",
                format!("no such stimulus: {freq_hz} Hz"),
            )];
        };
        let record = match runner.run_trial(class) {
            Ok(r) => r,
            Err(e) => return vec![ServerMessage::error("runtime", e.to_string())],
        };
        let mut out = vec![ServerMessage::DecodeResult(DecodeResult::from(&record))];
        out.extend(self.scene());
        let session = self.runner.as_ref().unwrap().session();
        if let Some(s) = &session.summary {
            out.push(ServerMessage::SessionSummary(SummaryView::from(s)));
        }
        if !self.runner.as_ref().unwrap().is_running() {
            if let Err(e) = self.record(session) {
                out.push(ServerMessage::error("runtime", e.to_string()));
            }
        }
        out
    }

    fn begin(&mut self) -> Vec<ServerMessage> {
        let config = OnlineConfig {
            experiment: self.next_experiment,
            ..self.config.clone()
        };
        match ExperimentRunner::new(&self.world, self.model.clone(), &self.subject, &config) {
            Ok(r) => {
                self.next_experiment += 1;
                self.runner = Some(r);
                self.paused = false;
                self.scene().into_iter().collect()
            }
            Err(e) => vec![ServerMessage::error("runtime", e.to_string())],
        }
    }

    /// Logs an abandoned experiment that had trials.
    fn end_current(&mut self) {
        if let Some(r) = self.runner.as_ref().filter(|r| r.is_running() && !r.log().is_empty()) {
            let session = r.session();
            let _ = self.record(session);
        }
    }

    fn record(&mut self, session: NavSession) -> Result<(), Error> {
        let result = match &self.out_dir {
            Some(dir) => write_log(&session_log_path(dir, session.experiment), &session.log),
            None => Ok(()),
        };
        self.finished.push(session);
        result
    }

    fn scene(&self) -> Option<ServerMessage> {
        self.runner.as_ref().map(|r| ServerMessage::SceneUpdate(SceneUpdate::of(r)))
    }

    fn wrap(&mut self, msgs: Vec<ServerMessage>) -> Vec<Envelope> {
        msgs.into_iter()
            .map(|m| {
                self.server_seq += 1;
                m.into_envelope(self.server_seq)
            })
            .collect()
    }
}

fn not_started() -> ServerMessage {
    ServerMessage::error("not_started", "no experiment is running; send start")
}

/// Serves one operator connection at a time over WebSocket.
#[derive(Debug)]
pub struct ConsoleServer {
    listener: TcpListener,
    session: ConsoleSession,
}

impl ConsoleServer {
    pub fn bind(addr: impl ToSocketAddrs, session: ConsoleSession) -> Result<Self, Error> {
        let listener = TcpListener::bind(addr).map_err(|e| Error::Session(format!("cannot bind: {e}")))?;
        Ok(Self { listener, session })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, Error> {
        self.listener
            .local_addr()
            .map_err(|e| Error::Session(e.to_string()))
    }

    pub fn session(&self) -> &ConsoleSession {
        &self.session
    }

    pub fn into_session(self) -> ConsoleSession {
        self.session
    }

    /// Accepts one connection and serves it until the client leaves. The
    /// session is paused afterwards.
    pub fn serve_one(&mut self) -> Result<(), Error> {
        let (stream, _) = self
            .listener
            .accept()
            .map_err(|e| Error::Session(format!("accept failed: {e}")))?;
        let mut ws = tungstenite::accept(stream).map_err(|e| Error::Session(format!("handshake failed: {e}")))?;
        let greeting = self.session.connect();
        let result = send_all(&mut ws, &greeting).and_then(|_| self.pump(&mut ws));
        self.session.disconnect();
        result
    }

    /// Serves connections forever.
    pub fn run(&mut self) -> Result<(), Error> {
        loop {
            if let Err(e) = self.serve_one() {
                eprintln!("console: {e}");
            }
        }
    }

    fn pump<S: std::io::Read + std::io::Write>(&mut self, ws: &mut WebSocket<S>) -> Result<(), Error> {
        loop {
            let replies = match ws.read() {
                Ok(Message::Text(text)) => self.session.handle_text(text.as_str()),
                Ok(Message::Binary(_)) => self.session.reject("malformed", "binary frames are not supported"),
                Ok(Message::Close(_)) => return Ok(()),
                Ok(_) => continue,
                Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
                Err(e) => return Err(Error::Session(format!("connection error: {e}"))),
            };
            send_all(ws, &replies)?;
        }
    }
}

fn send_all<S: std::io::Read + std::io::Write>(ws: &mut WebSocket<S>, envs: &[Envelope]) -> Result<(), Error> {
    for env in envs {
        let text = serde_json::to_string(env)?;
        ws.send(Message::text(text))
            .map_err(|e| Error::Session(format!("send failed: {e}")))?;
    }
    Ok(())
}
