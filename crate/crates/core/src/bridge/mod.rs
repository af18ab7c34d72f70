//! Stimulus server for external testbenches: an [`Env`] whose backend is a
//! socket peer that reports coverage and receives stimuli.

pub mod client;
mod protocol;
mod transcript;

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

use crate::agents::PolicyKind;
use crate::bits::BitVector;
use crate::env::{Backend, Env, EnvConfig, EnvError, Sample};
use crate::experiment::{build_agent, run_episode, Episode, ExperimentError};
use crate::hdl::ir::Direction;
use crate::hdl::{PortRole, PortSpec, PortSpecSet};
pub use protocol::{decode_message, encode_message, parse_coverage, ErrorCode, PortDecl, PortValue, WireMessage};
pub use transcript::{Transcript, TranscriptLine};

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("malformed frame {0}")]
    MalformedFrame(String),
    #[error("protocol violation while {phase}: got {got}")]
    ProtocolViolation { phase: SessionPhase, got: String },
    #[error("cannot bind: {0}")]
    BindFailure(std::io::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionPhase {
    AwaitingHello,
    Serving,
    Closed,
}

impl std::fmt::Display for SessionPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SessionPhase::AwaitingHello => "awaiting hello",
            SessionPhase::Serving => "serving",
            SessionPhase::Closed => "closed",
        })
    }
}

/// Line transport that records every frame it moves.
pub struct Channel<R, W> {
    reader: R,
    writer: W,
    transcript: Transcript,
}

impl<R: BufRead, W: Write> Channel<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        Self {
            reader,
            writer,
            transcript: Transcript::default(),
        }
    }

    /// Next inbound frame, or `None` at end of stream.
    pub fn recv(&mut self) -> Result<Option<WireMessage>, BridgeError> {
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        let raw = line.strip_suffix('\n').unwrap_or(&line);
        self.transcript.push(TranscriptLine::Inbound(raw.to_string()));
        decode_message(raw).map(Some)
    }

    pub fn send(&mut self, m: &WireMessage) -> Result<(), BridgeError> {
        let line = encode_message(m);
        self.transcript
            .push(TranscriptLine::Outbound(line.trim_end_matches('\n').to_string()));
        self.writer.write_all(line.as_bytes())?;
        self.writer.flush()?;
        Ok(())
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }
}

/// A failure the peer should hear about before the connection closes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireFault {
    pub code: ErrorCode,
    pub detail: String,
}

impl WireFault {
    fn from_error(e: &BridgeError) -> Option<Self> {
        let code = match e {
            BridgeError::MalformedFrame(_) => ErrorCode::Malformed,
            BridgeError::ProtocolViolation { .. } => ErrorCode::Protocol,
            _ => return None,
        };
        Some(Self {
            code,
            detail: e.to_string(),
        })
    }
}

/// Backend driven by a remote testbench. Each cycle sends the action ports
/// as a Stimulus and waits for the next Request carrying coverage.
pub struct RemoteBackend<R, W> {
    channel: Channel<R, W>,
    ports: PortSpecSet,
    driven: Vec<PortSpec>,
    phase: SessionPhase,
    fault: Option<WireFault>,
    started: bool,
}

impl<R: BufRead, W: Write> RemoteBackend<R, W> {
    /// `driven` are the ports the client declared and will apply.
    pub fn new(channel: Channel<R, W>, ports: PortSpecSet, driven: Vec<PortSpec>) -> Self {
        Self {
            channel,
            ports,
            driven,
            phase: SessionPhase::Serving,
            fault: None,
            started: false,
        }
    }

    pub fn phase(&self) -> SessionPhase {
        self.phase
    }

    pub fn channel_mut(&mut self) -> &mut Channel<R, W> {
        &mut self.channel
    }

    pub fn into_channel(self) -> Channel<R, W> {
        self.channel
    }

    /// Protocol failure seen by the last call, if any.
    pub fn take_fault(&mut self) -> Option<WireFault> {
        self.fault.take()
    }

    fn await_request(&mut self) -> Result<Sample, EnvError> {
        let fail = |this: &mut Self, e: BridgeError| {
            this.fault = WireFault::from_error(&e);
            this.phase = SessionPhase::Closed;
            EnvError::Backend(e.to_string())
        };
        match self.channel.recv() {
            Ok(Some(WireMessage::Request { cycle, coverage })) => {
                let score = parse_coverage(&coverage).expect("validated on decode");
                Ok(Sample {
                    cycle,
                    score,
                    breakdown: None,
                    newly_covered: 0,
                })
            }
            Ok(Some(other)) => {
                let e = BridgeError::ProtocolViolation {
                    phase: self.phase,
                    got: other.kind().to_string(),
                };
                Err(fail(self, e))
            }
            Ok(None) => {
                self.phase = SessionPhase::Closed;
                Err(EnvError::Backend("client closed the connection".into()))
            }
            Err(e) => Err(fail(self, e)),
        }
    }
}

impl<R: BufRead, W: Write> Backend for RemoteBackend<R, W> {
    fn port_spec(&self) -> &PortSpecSet {
        &self.ports
    }

    fn driven_inputs(&self) -> &[PortSpec] {
        &self.driven
    }

    fn has_breakdown(&self) -> bool {
        false
    }

    /// The testbench resets its own simulator; the first Request reports
    /// the post-reset coverage. A session has exactly one episode.
    fn reset(&mut self, _: &[u64]) -> Result<Sample, EnvError> {
        if self.started || self.phase != SessionPhase::Serving {
            return Err(EnvError::Backend("a remote session cannot be reset twice".into()));
        }
        self.started = true;
        self.await_request()
    }

    fn apply(&mut self, _: &[u64], action: &[(String, BitVector)]) -> Result<Sample, EnvError> {
        let values = action
            .iter()
            .map(|(port, v)| PortValue {
                port: port.clone(),
                bits: v.to_bin_string(),
            })
            .collect();
        if let Err(e) = self.channel.send(&WireMessage::Stimulus { values }) {
            self.phase = SessionPhase::Closed;
            return Err(EnvError::Backend(e.to_string()));
        }
        self.await_request()
    }
}

/// Validates a Hello against the served design. Returns the declared
/// ports, which must include every action port at its true width.
pub fn negotiate(msg: Option<WireMessage>, config: &EnvConfig, ports: &PortSpecSet) -> Result<Vec<PortSpec>, WireFault> {
    let fault = |code, detail: String| WireFault { code, detail };
    let (design, declared) = match msg {
        Some(WireMessage::Hello { design, ports }) => (design, ports),
        Some(other) => {
            return Err(fault(
                ErrorCode::Protocol,
                format!("expected hello while {}, got {}", SessionPhase::AwaitingHello, other.kind()),
            ))
        }
        None => return Err(fault(ErrorCode::Protocol, "connection closed before hello".into())),
    };
    if design != ports.design_name {
        return Err(fault(ErrorCode::UnknownDesign, format!("this server drives `{}`, not `{design}`", ports.design_name)));
    }
    let mut driven = Vec::new();
    for d in &declared {
        let spec = ports
            .get(&d.name)
            .filter(|p| p.direction == Direction::Input && p.role != PortRole::Clock)
            .ok_or_else(|| fault(ErrorCode::PortMismatch, format!("`{}` is not a drivable input of `{design}`", d.name)))?;
        if spec.width != d.width {
            return Err(fault(
                ErrorCode::PortMismatch,
                format!("`{}` is {} bits wide, client declared {}", d.name, spec.width, d.width),
            ));
        }
        if driven.iter().any(|p: &PortSpec| p.name == d.name) {
            return Err(fault(ErrorCode::PortMismatch, format!("`{}` declared twice", d.name)));
        }
        driven.push(spec.clone());
    }
    if let Some(missing) = config.ports.iter().find(|a| !driven.iter().any(|p| &p.name == *a)) {
        return Err(fault(ErrorCode::PortMismatch, format!("action port `{missing}` not declared")));
    }
    Ok(driven)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionEnd {
    /// Server sent Done with this reason.
    Done(String),
    /// Server sent an Error frame and closed.
    Error(ErrorCode),
    /// The client went away mid-session.
    ClientClosed,
}

#[derive(Debug)]
pub struct SessionOutcome {
    pub end: SessionEnd,
    pub transcript: Transcript,
    /// Present when the episode ran to completion.
    pub episode: Option<Episode>,
}

/// Serves one client over any line transport: handshake, one episode of
/// Request/Stimulus exchanges, then Done (or Error on a protocol fault).
pub fn run_session<R: BufRead, W: Write>(
    config: &EnvConfig,
    ports: &PortSpecSet,
    reader: R,
    writer: W,
) -> Result<SessionOutcome, BridgeError> {
    let mut ch = Channel::new(reader, writer);
    let first = match ch.recv() {
        Ok(m) => m,
        Err(e) => match WireFault::from_error(&e) {
            Some(f) => return refuse(ch, f),
            None => return Err(e),
        },
    };
    let driven = match negotiate(first, config, ports) {
        Ok(d) => d,
        Err(f) => return refuse(ch, f),
    };
    let mut env = Env::new(config.clone(), RemoteBackend::new(ch, ports.clone(), driven))?;
    let mut agent = build_agent(&env, config)?;
    let learn = config.learning_policy != PolicyKind::Random;
    let result = run_episode(&mut env, &mut agent, learn);
    let reached = env.score() >= env.config().target;
    let mut backend = env.into_backend();
    let fault = backend.take_fault();
    let mut ch = backend.into_channel();
    match result {
        Ok(ep) => {
            let reason = if reached { "target" } else { "max_steps" };
            ch.send(&WireMessage::Done { reason: reason.into() })?;
            Ok(SessionOutcome {
                end: SessionEnd::Done(reason.into()),
                transcript: ch.into_transcript(),
                episode: Some(ep),
            })
        }
        Err(_) if fault.is_some() => refuse(ch, fault.expect("checked")),
        Err(ExperimentError::Env(EnvError::Backend(_))) => Ok(SessionOutcome {
            end: SessionEnd::ClientClosed,
            transcript: ch.into_transcript(),
            episode: None,
        }),
        Err(e) => Err(e.into()),
    }
}

fn refuse<R: BufRead, W: Write>(mut ch: Channel<R, W>, f: WireFault) -> Result<SessionOutcome, BridgeError> {
    // the peer may already be gone; the transcript still records the attempt
    let _ = ch.send(&WireMessage::Error {
        code: f.code,
        detail: f.detail,
    });
    Ok(SessionOutcome {
        end: SessionEnd::Error(f.code),
        transcript: ch.into_transcript(),
        episode: None,
    })
}

/// Replays the inbound side of a transcript through a fresh session and
/// returns the resulting transcript.
pub fn replay(config: &EnvConfig, ports: &PortSpecSet, recorded: &Transcript) -> Result<Transcript, BridgeError> {
    let mut input = String::new();
    for line in recorded.inbound() {
        input.push_str(line);
        input.push('\n');
    }
    Ok(run_session(config, ports, input.as_bytes(), std::io::sink())?.transcript)
}

#[derive(Debug, Clone, Default)]
pub struct ServeLimits {
    /// Stop after this many sessions; `None` serves forever.
    pub max_sessions: Option<usize>,
    pub read_timeout: Option<Duration>,
    /// Directory for `session_<n>.log` transcripts.
    pub transcript_dir: Option<PathBuf>,
}

/// A bound server, one client at a time.
pub struct Server {
    listener: TcpListener,
    config: EnvConfig,
    ports: PortSpecSet,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, config: EnvConfig, ports: PortSpecSet) -> Result<Self, BridgeError> {
        let listener = TcpListener::bind(addr).map_err(BridgeError::BindFailure)?;
        Ok(Self { listener, config, ports })
    }

    pub fn local_addr(&self) -> std::io::Result<std::net::SocketAddr> {
        self.listener.local_addr()
    }

    pub fn serve(&self, limits: &ServeLimits) -> Result<Vec<SessionEnd>, BridgeError> {
        let mut ends = Vec::new();
        for (n, stream) in self.listener.incoming().enumerate() {
            let stream = stream?;
            let outcome = self.session(stream, limits)?;
            log::info!("session {n} ended: {:?}", outcome.end);
            if let Some(dir) = &limits.transcript_dir {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join(format!("session_{n}.log")), outcome.transcript.to_text())?;
            }
            ends.push(outcome.end);
            if limits.max_sessions.is_some_and(|m| ends.len() >= m) {
                break;
            }
        }
        Ok(ends)
    }

    fn session(&self, stream: TcpStream, limits: &ServeLimits) -> Result<SessionOutcome, BridgeError> {
        stream.set_read_timeout(limits.read_timeout)?;
        stream.set_nodelay(true)?;
        let reader = BufReader::new(stream.try_clone()?);
        let out = run_session(&self.config, &self.ports, reader, &stream);
        let _ = stream.shutdown(std::net::Shutdown::Both);
        match out {
            Err(BridgeError::Io(e)) => Ok(SessionOutcome {
                end: SessionEnd::ClientClosed,
                transcript: Transcript::default(),
                episode: None,
            })
            .inspect(|_| log::warn!("session i/o: {e}")),
            other => other,
        }
    }
}

/// Binds and serves.
pub fn serve(addr: impl ToSocketAddrs, config: EnvConfig, ports: PortSpecSet, limits: &ServeLimits) -> Result<Vec<SessionEnd>, BridgeError> {
    Server::bind(addr, config, ports)?.serve(limits)
}
