use super::*;
use crate::corpus::ENTRIES;
use crate::hdl::ports::parse_port_spec;

fn default() -> Template {
    Template::parse(DEFAULT_TEMPLATE).unwrap()
}

fn alu_ports() -> PortSpecSet {
    crate::corpus::entry("alu").unwrap().ports().unwrap()
}

/// The `.name(net)` lines inside the dut instance.
fn connections(sv: &str) -> Vec<String> {
    let start = sv.find(" dut (").unwrap();
    let end = start + sv[start..].find(");").unwrap();
    sv[start..end]
        .lines()
        .filter_map(|l| l.trim().strip_prefix('.'))
        .map(|l| l[..l.find('(').unwrap()].to_string())
        .collect()
}

#[test]
fn design_name_and_unknown_placeholders() {
    let ports = alu_ports();
    assert_eq!(render_testbench(&ports, &Template::parse("{{design_name}}").unwrap()).unwrap(), "alu");
    assert_eq!(
        render_testbench(&ports, &Template::parse("{{nonexistent}}").unwrap()),
        Err(TbgenError::UnresolvedPlaceholder("nonexistent".into()))
    );
    let empty = PortSpecSet { design_name: "e".into(), ports: vec![] };
    assert_eq!(render_testbench(&empty, &default()), Err(TbgenError::EmptyPortSet));
}

#[test]
fn every_port_is_connected_once() {
    for e in ENTRIES {
        let ports = e.ports().unwrap();
        let sv = render_testbench(&ports, &default()).unwrap();
        let conns = connections(&sv);
        let names: Vec<String> = ports.ports.iter().map(|p| p.name.clone()).collect();
        assert_eq!(conns, names, "{}", e.name);
        assert_eq!(sv_smoke_check(&sv), Vec::<String>::new(), "{}", e.name);
        for p in ports.inputs().filter(|p| p.role == PortRole::Data) {
            assert!(sv.contains(&format!("cov_socket_declare(\"{}\", {});", p.name, p.width)), "{}", p.name);
        }
    }
}

#[test]
fn reset_polarity_follows_name() {
    let ports = crate::corpus::entry("fifo_sync").unwrap().ports().unwrap();
    let r = ports.reset().unwrap();
    let sv = render_testbench(&ports, &default()).unwrap();
    let (on, off) = if r.name.ends_with("_n") { ("1'b0", "1'b1") } else { ("1'b1", "1'b0") };
    assert!(sv.contains(&format!("{} = {on};", r.name)));
    assert!(sv.contains(&format!("{} = {off};", r.name)));
}

#[test]
fn rendering_is_pure() {
    let ports = alu_ports();
    let a = render_testbench(&ports, &default()).unwrap();
    let b = render_testbench(&ports, &default()).unwrap();
    assert_eq!(a, b);
    // round-tripping the spec through its XML form changes nothing
    let xml = crate::hdl::emit_port_spec(&ports, crate::hdl::PortFormat::Xml);
    let again = render_testbench(&parse_port_spec(&xml).unwrap(), &default()).unwrap();
    assert_eq!(a, again);
}

#[test]
fn alu_testbench_matches_golden() {
    let sv = render_testbench(&alu_ports(), &default()).unwrap();
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus/alu_tb.sv");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &sv).unwrap();
    }
    assert_eq!(sv, std::fs::read_to_string(&path).unwrap());
}

#[test]
fn smoke_check_rejects_broken_sv() {
    let good = render_testbench(&alu_ports(), &default()).unwrap();
    assert!(sv_smoke_check(&good).is_empty());
    let cases = [
        good.replacen("  );", "  ;", 1),
        good.replacen("endmodule", "", 1),
        good.replacen("    end\n", "\n", 1),
        good.replacen(".opcode(opcode)", ".opcode(opcodes)", 1),
        good.replacen("module alu_tb;", "module alu_tb; {{x}}", 1),
    ];
    for (i, bad) in cases.iter().enumerate() {
        assert_ne!(bad, &good, "case {i} did not apply");
        assert!(!sv_smoke_check(bad).is_empty(), "case {i} passed");
    }
    // brackets inside comments and strings are ignored
    assert!(sv_smoke_check("module m; // (\n string s = \"[\"; /* { */ endmodule\n").is_empty());
}
