//! Newline-delimited JSON wire messages.

use serde::{Deserialize, Serialize};

use super::BridgeError;
use crate::sim::Score;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortDecl {
    pub name: String,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortValue {
    pub port: String,
    /// Binary, most significant bit first.
    pub bits: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCode {
    Protocol,
    UnknownDesign,
    PortMismatch,
    Malformed,
}

impl ErrorCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCode::Protocol => "protocol",
            ErrorCode::UnknownDesign => "unknown-design",
            ErrorCode::PortMismatch => "port-mismatch",
            ErrorCode::Malformed => "malformed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum WireMessage {
    Hello { design: String, ports: Vec<PortDecl> },
    /// `coverage` is a decimal percent in [0, 100].
    Request { cycle: u64, coverage: String },
    Stimulus { values: Vec<PortValue> },
    Done { reason: String },
    Error { code: ErrorCode, detail: String },
}

impl WireMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            WireMessage::Hello { .. } => "hello",
            WireMessage::Request { .. } => "request",
            WireMessage::Stimulus { .. } => "stimulus",
            WireMessage::Done { .. } => "done",
            WireMessage::Error { .. } => "error",
        }
    }

    /// Field-level checks serde cannot express.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            WireMessage::Hello { ports, .. } => {
                if let Some(p) = ports.iter().find(|p| p.width == 0 || p.width > 64) {
                    return Err(format!("port `{}` has width {}", p.name, p.width));
                }
            }
            WireMessage::Request { coverage, .. } => {
                parse_coverage(coverage)?;
            }
            WireMessage::Stimulus { values } => {
                for v in values {
                    if v.bits.is_empty() || v.bits.len() > 64 || !v.bits.bytes().all(|b| b == b'0' || b == b'1') {
                        return Err(format!("port `{}` has bits `{}`", v.port, v.bits));
                    }
                }
            }
            WireMessage::Done { .. } | WireMessage::Error { .. } => {}
        }
        Ok(())
    }
}

/// Exact score for a reported coverage percent.
pub fn parse_coverage(s: &str) -> Result<Score, String> {
    Score::from_percent_str(s).ok_or_else(|| format!("coverage `{s}` is not a percent in [0,100]"))
}

/// One LF-terminated JSON line.
pub fn encode_message(m: &WireMessage) -> String {
    let mut s = serde_json::to_string(m).expect("wire messages serialize");
    s.push('\n');
    s
}

/// Parses one line, with or without its terminator.
pub fn decode_message(line: &str) -> Result<WireMessage, BridgeError> {
    let body = line.strip_suffix('\n').unwrap_or(line);
    let body = body.strip_suffix('\r').unwrap_or(body);
    let malformed = |why: String| BridgeError::MalformedFrame(format!("{}: {why}", excerpt(body)));
    if body.trim().is_empty() {
        return Err(malformed("empty line".into()));
    }
    let m: WireMessage = serde_json::from_str(body).map_err(|e| malformed(e.to_string()))?;
    m.validate().map_err(malformed)?;
    Ok(m)
}

fn excerpt(s: &str) -> String {
    const MAX: usize = 60;
    if s.chars().count() <= MAX {
        format!("`{s}`")
    } else {
        format!("`{}...`", s.chars().take(MAX).collect::<String>())
    }
}
