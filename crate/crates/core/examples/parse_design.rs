//! Parse a Verilog module and print its port specification.
//!
//!     cargo run --example parse_design [file.v] [--json]

use covgen::hdl::{detect_fsms, emit_port_spec, extract_ports, parse_design, PortFormat};

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let src = match args.iter().find(|a| !a.starts_with("--")) {
        Some(path) => std::fs::read_to_string(path)?,
        None => covgen::corpus::entry("tap_fsm")?.source.to_string(),
    };
    let format = if args.iter().any(|a| a == "--json") { PortFormat::Json } else { PortFormat::Xml };

    let ir = parse_design(&src)?;
    print!("{}", emit_port_spec(&extract_ports(&ir), format));
    println!("blocks: {}  condition sites: {}", ir.blocks.len(), ir.cond_sites.len());
    for f in detect_fsms(&ir) {
        println!("fsm `{}`: {} states, {} transitions", f.register_name, f.states.len(), f.transitions.len());
    }
    Ok(())
}
