//! Verilog frontend: parsing, port extraction and FSM detection.

pub mod fsm;
pub mod ir;
mod lexer;
mod parser;
pub mod ports;

use thiserror::Error;

pub use fsm::{detect_fsms, FsmDescriptor};
pub use ir::DesignIR;
pub use parser::{collect_leaves, parse_design};
pub use ports::{emit_port_spec, extract_ports, extract_ports_with, PortFormat, PortRole, PortSpec, PortSpecSet, RoleOverrides};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HdlError {
    #[error("syntax error at {line}:{col} near `{token}`")]
    Syntax { line: u32, col: u32, token: String },
    #[error("unsupported construct `{construct}` at {line}:{col}")]
    Unsupported { construct: String, line: u32, col: u32 },
    #[error("combinational cycle through `{0}`")]
    CombinationalCycle(String),
    #[error("undeclared signal `{name}` at {line}:{col}")]
    UndeclaredSignal { name: String, line: u32, col: u32 },
    #[error("`{name}` redeclared at {line}:{col}")]
    Redeclared { name: String, line: u32, col: u32 },
    #[error("invalid assignment target `{name}` at {line}:{col}: {reason}")]
    InvalidTarget {
        name: String,
        line: u32,
        col: u32,
        reason: String,
    },
    #[error("malformed port specification: {0}")]
    PortSpec(String),
}
