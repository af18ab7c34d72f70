//! Primary-port metadata and its byte-stable XML/JSON serialization.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ir::Direction;
use super::{DesignIR, HdlError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortRole {
    Clock,
    Reset,
    Data,
}

impl PortRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            PortRole::Clock => "clock",
            PortRole::Reset => "reset",
            PortRole::Data => "data",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortSpec {
    pub name: String,
    pub direction: Direction,
    pub width: u32,
    pub role: PortRole,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortSpecSet {
    pub design_name: String,
    pub ports: Vec<PortSpec>,
}

impl PortSpecSet {
    pub fn get(&self, name: &str) -> Option<&PortSpec> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn clock(&self) -> Option<&PortSpec> {
        self.ports.iter().find(|p| p.role == PortRole::Clock)
    }

    pub fn reset(&self) -> Option<&PortSpec> {
        self.ports.iter().find(|p| p.role == PortRole::Reset)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &PortSpec> {
        self.ports.iter().filter(|p| p.direction == Direction::Input)
    }

    /// Checks the set-level invariants (unique names, widths, single
    /// clock/reset, at least one input).
    pub fn validate(&self) -> Result<(), HdlError> {
        let mut seen = HashSet::new();
        for p in &self.ports {
            if !seen.insert(p.name.as_str()) {
                return Err(HdlError::PortSpec(format!("duplicate port `{}`", p.name)));
            }
            if p.width == 0 {
                return Err(HdlError::PortSpec(format!("port `{}` has zero width", p.name)));
            }
        }
        for role in [PortRole::Clock, PortRole::Reset] {
            if self.ports.iter().filter(|p| p.role == role).count() > 1 {
                return Err(HdlError::PortSpec(format!("more than one {} port", role.as_str())));
            }
        }
        if self.inputs().next().is_none() {
            return Err(HdlError::PortSpec(format!("design `{}` has no input ports", self.design_name)));
        }
        Ok(())
    }
}

/// Explicit clock/reset port names that take precedence over name inference.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoleOverrides {
    pub clock: Option<String>,
    pub reset: Option<String>,
}

const CLOCK_NAMES: &[&str] = &["clk", "clock"];
const RESET_NAMES: &[&str] = &["rst", "reset", "rst_n", "reset_n"];

pub fn extract_ports(ir: &DesignIR) -> PortSpecSet {
    extract_ports_with(ir, &RoleOverrides::default())
}

pub fn extract_ports_with(ir: &DesignIR, overrides: &RoleOverrides) -> PortSpecSet {
    let mut ports: Vec<PortSpec> = ir
        .ports
        .iter()
        .map(|id| {
            let s = ir.signal(*id);
            PortSpec {
                name: s.name.clone(),
                direction: s.direction.unwrap_or(Direction::Input),
                width: s.width,
                role: PortRole::Data,
            }
        })
        .collect();

    assign_role(&mut ports, PortRole::Clock, overrides.clock.as_deref(), CLOCK_NAMES);
    assign_role(&mut ports, PortRole::Reset, overrides.reset.as_deref(), RESET_NAMES);
    PortSpecSet {
        design_name: ir.name.clone(),
        ports,
    }
}

fn assign_role(ports: &mut [PortSpec], role: PortRole, forced: Option<&str>, names: &[&str]) {
    if let Some(name) = forced {
        match ports.iter_mut().find(|p| p.name == name) {
            Some(p) => p.role = role,
            None => log::warn!("{} override `{}` names no port", role.as_str(), name),
        }
        return;
    }
    let mut taken = false;
    for p in ports.iter_mut() {
        let eligible = p.role == PortRole::Data
            && p.direction == Direction::Input
            && p.width == 1
            && names.iter().any(|n| n.eq_ignore_ascii_case(&p.name));
        if !eligible {
            continue;
        }
        if taken {
            log::warn!("port `{}` also looks like a {}; treating it as data", p.name, role.as_str());
        } else {
            p.role = role;
            taken = true;
        }
    }
}

/// Whether the reset port `name` is active high.
///
/// An asynchronous reset takes its polarity from the sensitivity edge;
/// otherwise names ending in `n` (`rst_n`, `resetn`) are active low.
pub fn reset_active_high(ir: &DesignIR, name: &str) -> bool {
    if let Some(id) = ir.find_signal(name) {
        for p in &ir.processes {
            if let Some(r) = &p.reset {
                if r.signal == id {
                    return r.active_high;
                }
            }
        }
    }
    reset_active_high_by_name(name)
}

/// Polarity guess from the port name alone: `_n`-style names are active low.
pub fn reset_active_high_by_name(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    !(lower.ends_with("_n") || lower.ends_with("rstn") || lower.ends_with("resetn"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortFormat {
    Xml,
    Json,
}

impl PortFormat {
    /// Picks the format from a file extension, defaulting to XML.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => PortFormat::Json,
            _ => PortFormat::Xml,
        }
    }
}

pub fn emit_port_spec(ports: &PortSpecSet, format: PortFormat) -> String {
    let mut out = String::new();
    match format {
        PortFormat::Xml => {
            out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
            let _ = writeln!(out, "<design name=\"{}\">", xml_escape(&ports.design_name));
            for p in &ports.ports {
                let _ = writeln!(
                    out,
                    "  <port name=\"{}\" direction=\"{}\" width=\"{}\" role=\"{}\"/>",
                    xml_escape(&p.name),
                    p.direction.as_str(),
                    p.width,
                    p.role.as_str()
                );
            }
            out.push_str("</design>\n");
        }
        PortFormat::Json => {
            let name = serde_json::to_string(&ports.design_name).expect("string serializes");
            if ports.ports.is_empty() {
                let _ = writeln!(out, "{{\"design\":{name},\"ports\":[]}}");
                return out;
            }
            let _ = writeln!(out, "{{\"design\":{name},\"ports\":[");
            for (i, p) in ports.ports.iter().enumerate() {
                let sep = if i + 1 == ports.ports.len() { "" } else { "," };
                let _ = writeln!(
                    out,
                    "  {{\"name\":{},\"direction\":\"{}\",\"width\":{},\"role\":\"{}\"}}{sep}",
                    serde_json::to_string(&p.name).expect("string serializes"),
                    p.direction.as_str(),
                    p.width,
                    p.role.as_str()
                );
            }
            out.push_str("]}\n");
        }
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('"', "&quot;").replace('<', "&lt;").replace('>', "&gt;")
}

fn xml_unescape(s: &str) -> String {
    s.replace("&quot;", "\"").replace("&lt;", "<").replace("&gt;", ">").replace("&amp;", "&")
}

/// Reads a port specification written by [`emit_port_spec`] in either format.
pub fn parse_port_spec(text: &str) -> Result<PortSpecSet, HdlError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        #[derive(Deserialize)]
        struct JsonSpec {
            design: String,
            ports: Vec<PortSpec>,
        }
        let j: JsonSpec = serde_json::from_str(text).map_err(|e| HdlError::PortSpec(e.to_string()))?;
        return Ok(PortSpecSet {
            design_name: j.design,
            ports: j.ports,
        });
    }
    let mut design_name = None;
    let mut ports = Vec::new();
    for tag in text.split('<').skip(1) {
        if tag.starts_with('?') || tag.starts_with('!') {
            continue;
        }
        let body = tag.split('>').next().unwrap_or("").trim_end_matches('/');
        let (elem, attrs) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let attrs = parse_attrs(attrs)?;
        let get = |k: &str| {
            attrs
                .iter()
                .find(|(n, _)| n == k)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| HdlError::PortSpec(format!("<{elem}> missing `{k}`")))
        };
        match elem {
            "design" => design_name = Some(get("name")?),
            "port" => {
                let direction = match get("direction")?.as_str() {
                    "input" => Direction::Input,
                    "output" => Direction::Output,
                    "inout" => Direction::Inout,
                    d => return Err(HdlError::PortSpec(format!("bad direction `{d}`"))),
                };
                let role = match get("role")?.as_str() {
                    "clock" => PortRole::Clock,
                    "reset" => PortRole::Reset,
                    "data" => PortRole::Data,
                    r => return Err(HdlError::PortSpec(format!("bad role `{r}`"))),
                };
                let width = get("width")?
                    .parse()
                    .map_err(|_| HdlError::PortSpec("bad width".into()))?;
                ports.push(PortSpec {
                    name: get("name")?,
                    direction,
                    width,
                    role,
                });
            }
            _ => {}
        }
    }
    Ok(PortSpecSet {
        design_name: design_name.ok_or_else(|| HdlError::PortSpec("missing <design>".into()))?,
        ports,
    })
}

fn parse_attrs(s: &str) -> Result<Vec<(String, String)>, HdlError> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let (key, after) = rest
            .split_once('=')
            .ok_or_else(|| HdlError::PortSpec(format!("bad attribute list `{s}`")))?;
        let after = after.trim_start();
        let after = after
            .strip_prefix('"')
            .ok_or_else(|| HdlError::PortSpec(format!("unquoted attribute `{key}`")))?;
        let (value, tail) = after
            .split_once('"')
            .ok_or_else(|| HdlError::PortSpec(format!("unterminated attribute `{key}`")))?;
        out.push((key.trim().to_string(), xml_unescape(value)));
        rest = tail.trim_start();
    }
    Ok(out)
}
