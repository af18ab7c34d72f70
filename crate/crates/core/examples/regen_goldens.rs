//! Rewrite the corpus port specs and golden JSON from the sources. Run from
//! `crates/core` after changing a design; without `--write` it only diffs.

use covgen::corpus::{render_golden, ENTRIES};
use covgen::hdl::{emit_port_spec, extract_ports, PortFormat};

fn main() -> anyhow::Result<()> {
    let write = std::env::args().any(|a| a == "--write");
    let mut stale = 0;
    for e in ENTRIES {
        let ir = e.ir()?;
        let cfg = e.env_config()?;
        let xml = emit_port_spec(&extract_ports(&ir), PortFormat::Xml);
        let golden = render_golden(&ir, &cfg, cfg.coverage_type, 5000, 8)?;
        for (file, fresh, shipped) in [("ports.xml", &xml, e.ports_xml), ("golden.json", &golden, e.golden_json)] {
            if fresh.as_str() == shipped {
                continue;
            }
            stale += 1;
            let path = format!("corpus/{}.{file}", e.name);
            if write {
                std::fs::write(&path, fresh)?;
                println!("wrote {path}");
            } else {
                println!("{path} is stale");
            }
        }
    }
    if stale == 0 {
        println!("corpus goldens are up to date");
    }
    Ok(())
}
