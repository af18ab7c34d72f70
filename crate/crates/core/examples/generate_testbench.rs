//! Render the default SystemVerilog testbench for a built-in design.
//!
//!     cargo run --example generate_testbench [design]

use covgen::tbgen::{render_testbench, sv_smoke_check, Template, DEFAULT_TEMPLATE};

fn main() -> anyhow::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "fifo_sync".into());
    let ports = covgen::corpus::entry(&name)?.ports()?;
    let sv = render_testbench(&ports, &Template::parse(DEFAULT_TEMPLATE)?)?;
    print!("{sv}");
    let problems = sv_smoke_check(&sv);
    eprintln!("smoke check: {}", if problems.is_empty() { "clean".to_string() } else { problems.join("; ") });
    Ok(())
}
