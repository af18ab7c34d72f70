//! Minimal blocking client and a toy opcode-coverage DUV for exercising a
//! server end to end.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};

use super::{decode_message, encode_message, BridgeError, PortDecl, SessionPhase, WireMessage};
use crate::sim::Score;

/// Counts distinct values seen on one port.
#[derive(Debug, Clone)]
pub struct MockDuv {
    pub port: String,
    pub width: u32,
    seen: BTreeSet<u64>,
}

impl MockDuv {
    pub fn new(port: &str, width: u32) -> Self {
        Self {
            port: port.to_string(),
            width,
            seen: BTreeSet::new(),
        }
    }

    pub fn apply(&mut self, bits: &str) -> Result<(), String> {
        if bits.len() != self.width as usize {
            return Err(format!("`{}` got {} bits, expected {}", self.port, bits.len(), self.width));
        }
        self.seen.insert(u64::from_str_radix(bits, 2).map_err(|e| e.to_string())?);
        Ok(())
    }

    pub fn coverage(&self) -> Score {
        Score::new(self.seen.len() as u64, 1u64 << self.width)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientRun {
    /// The server's last frame: Done or Error.
    pub last: Option<WireMessage>,
    pub cycles: u64,
    pub coverage: Score,
}

/// Runs one session: Hello, then Request/Stimulus until the server sends
/// Done or Error, or `max_cycles` Requests have been sent.
pub fn run_mock_session(addr: impl ToSocketAddrs, design: &str, duv: &mut MockDuv, max_cycles: u64) -> Result<ClientRun, BridgeError> {
    let stream = TcpStream::connect(addr)?;
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = &stream;
    let mut send = |m: &WireMessage| -> std::io::Result<()> { writer.write_all(encode_message(m).as_bytes()) };
    send(&WireMessage::Hello {
        design: design.to_string(),
        ports: vec![PortDecl {
            name: duv.port.clone(),
            width: duv.width,
        }],
    })?;
    let mut cycles = 0;
    let mut line = String::new();
    while cycles < max_cycles {
        cycles += 1;
        send(&WireMessage::Request {
            cycle: cycles,
            coverage: duv.coverage().percent_string(6),
        })?;
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        match decode_message(&line)? {
            WireMessage::Stimulus { values } => {
                for v in values {
                    if v.port == duv.port {
                        duv.apply(&v.bits).map_err(BridgeError::MalformedFrame)?;
                    }
                }
            }
            m @ (WireMessage::Done { .. } | WireMessage::Error { .. }) => {
                return Ok(ClientRun {
                    last: Some(m),
                    cycles,
                    coverage: duv.coverage(),
                })
            }
            other => {
                return Err(BridgeError::ProtocolViolation {
                    phase: SessionPhase::Serving,
                    got: other.kind().to_string(),
                })
            }
        }
    }
    Ok(ClientRun {
        last: None,
        cycles,
        coverage: duv.coverage(),
    })
}
