//! SystemVerilog testbench generation from a port spec and a template.

mod smoke;
mod template;

use thiserror::Error;

use crate::hdl::ir::Direction;
use crate::hdl::ports::reset_active_high_by_name;
use crate::hdl::{PortRole, PortSpec, PortSpecSet};
pub use smoke::sv_smoke_check;
pub use template::{Template, Value};

/// Template shipped with the crate.
pub const DEFAULT_TEMPLATE: &str = include_str!("../../templates/testbench.sv.tpl");

#[derive(Debug, Error, PartialEq)]
pub enum TbgenError {
    #[error("unresolved placeholder `{0}`")]
    UnresolvedPlaceholder(String),
    #[error("port set is empty")]
    EmptyPortSet,
    #[error("template line {line}: {msg}")]
    TemplateSyntax { line: usize, msg: String },
}

/// The model templates see.
///
/// Top level: `design_name`, `clock` (absent without a clock port), and the
/// lists `ports`, `inputs`, `outputs`, `data_inputs` and `resets`. Each port
/// has `name`, `width`, `msb`, `direction`, `role`, `range` (`"[7:0] "`, or
/// empty for one bit) and `sep` (`","` except on the last item of its
/// list). Resets also carry `active` and `inactive` literals.
pub fn model(ports: &PortSpecSet) -> Value {
    let list = |sel: &dyn Fn(&PortSpec) -> bool| {
        let chosen: Vec<&PortSpec> = ports.ports.iter().filter(|p| sel(p)).collect();
        let n = chosen.len();
        Value::List(chosen.into_iter().enumerate().map(|(i, p)| port_value(p, i + 1 == n)).collect())
    };
    let mut fields = vec![
        ("design_name", Value::str(&ports.design_name)),
        ("ports", list(&|_| true)),
        ("inputs", list(&|p| p.direction == Direction::Input)),
        ("outputs", list(&|p| p.direction != Direction::Input)),
        ("data_inputs", list(&|p| p.direction == Direction::Input && p.role == PortRole::Data)),
    ];
    let resets = ports
        .ports
        .iter()
        .filter(|p| p.direction == Direction::Input && p.role == PortRole::Reset)
        .map(|p| {
            let (on, off) = if reset_active_high_by_name(&p.name) { ("1'b1", "1'b0") } else { ("1'b0", "1'b1") };
            let mut v = port_value(p, true);
            if let Value::Map(m) = &mut v {
                m.insert("active".into(), Value::str(on));
                m.insert("inactive".into(), Value::str(off));
            }
            v
        })
        .collect();
    fields.push(("resets", Value::List(resets)));
    if let Some(c) = ports.clock() {
        fields.push(("clock", port_value(c, true)));
    }
    Value::map(fields)
}

fn port_value(p: &PortSpec, last: bool) -> Value {
    let range = if p.width == 1 { String::new() } else { format!("[{}:0] ", p.width - 1) };
    Value::map([
        ("name", Value::str(&p.name)),
        ("width", Value::str(p.width.to_string())),
        ("msb", Value::str((p.width - 1).to_string())),
        ("direction", Value::str(p.direction.as_str())),
        ("role", Value::str(p.role.as_str())),
        ("range", Value::str(range)),
        ("sep", Value::str(if last { "" } else { "," })),
    ])
}

/// Renders a testbench. Pure: identical inputs give identical bytes.
pub fn render_testbench(ports: &PortSpecSet, template: &Template) -> Result<String, TbgenError> {
    if ports.ports.is_empty() {
        return Err(TbgenError::EmptyPortSet);
    }
    template.render(&model(ports))
}

#[cfg(test)]
mod tests;
