use super::*;
use crate::env::make_env;

#[test]
fn ships_four_designs() {
    let c = load_corpus().unwrap();
    let names: Vec<_> = c.iter().map(|e| e.name).collect();
    assert_eq!(names, ["alu", "tap_fsm", "fifo_sync", "fir4"]);
    assert!(matches!(entry("cordic"), Err(CorpusError::UnknownDesign(_))));
}

// counted by hand from the sources: blocks are process bodies, if/else arms
// and case items; sites are if conditions, case items and ternaries
#[test]
fn structural_counts_match_hand_counts() {
    let expect = [
        ("alu", 10, 2 * (32 + 32 + 3 + 1 + 32), 0, 0, 8),
        ("tap_fsm", 20, 2 * (1 + 1 + 1 + 4 + 7 + 4), 16, 32, 33),
        ("fifo_sync", 8, 2 * (1 + 1 + 1 + 1 + 4 + 4 + 1 + 1 + 8 * 4 + 3 + 3 + 4 + 1 + 1), 0, 0, 5),
        ("fir4", 3, 2 * (1 + 1 + 8 + 10 + 3 * 8), 0, 0, 1),
    ];
    for (name, blocks, toggles, states, arcs, sites) in expect {
        let g = entry(name).unwrap().golden().unwrap();
        assert_eq!(
            (g.blocks, g.toggle_items, g.fsm_states, g.fsm_transitions, g.condition_sites),
            (blocks, toggles, states, arcs, sites),
            "{name}"
        );
    }
}

#[test]
fn recommended_action_spaces() {
    for (name, ports, size) in [
        ("alu", vec!["opcode"], 8),
        ("tap_fsm", vec!["tms"], 2),
        ("fifo_sync", vec!["wr_en", "rd_en", "din"], 64),
        ("fir4", vec!["x"], 256),
    ] {
        let e = entry(name).unwrap();
        let cfg = e.env_config().unwrap();
        assert_eq!(cfg.ports, ports);
        assert_eq!(make_env(cfg, e.ir().unwrap()).unwrap().action_count(), size, "{name}");
    }
}

#[test]
fn corrupted_goldens_are_rejected() {
    let alu = entry("alu").unwrap();
    let xml = alu.ports_xml.replace("width=\"3\"", "width=\"4\"");
    let bad = CorpusEntry { ports_xml: Box::leak(xml.into_boxed_str()), ..alu };
    assert!(matches!(bad.check_integrity(), Err(CorpusError::Integrity { file, .. }) if file == "alu.ports.xml"));

    let json = alu.golden_json.replace("\"blocks\": 10", "\"blocks\": 11");
    let bad = CorpusEntry { golden_json: Box::leak(json.into_boxed_str()), ..alu };
    assert!(matches!(bad.check_integrity(), Err(CorpusError::Integrity { file, .. }) if file == "alu.golden.json"));

    let bad = CorpusEntry { golden_json: "{", ..alu };
    assert!(bad.check_integrity().is_err());

    let json = alu.golden_json.replace("\"covered\": 224", "\"covered\": 225");
    let bad = CorpusEntry { golden_json: Box::leak(json.into_boxed_str()), ..alu };
    assert!(bad.max_record().is_err());
}

#[test]
fn alu_maximum_misses_only_the_dead_default() {
    // the default arm never runs and the last item is never evaluated false
    let m = entry("alu").unwrap().max_record().unwrap();
    assert_eq!(m.max, Score::new(10 + 200 + 16 - 2, 10 + 200 + 16));
    assert_eq!(m.coverage_type, CoverageType::Code);
}

#[test]
fn recorded_maxima_are_reproduced() {
    for e in load_corpus().unwrap() {
        assert_eq!(e.probe_max().unwrap(), e.max_record().unwrap(), "{}", e.name);
    }
}

#[test]
fn configs_resolve_to_designs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = entry("fir4").unwrap().env_config().unwrap();
    assert_eq!(load_design(&cfg, dir.path()).unwrap().name, "fir4");
    let d = compare_design(&cfg, dir.path(), 10, 1).unwrap();
    assert_eq!(d.max, entry("fir4").unwrap().max_record().unwrap());

    std::fs::write(dir.path().join("m.v"), "module m(input clk, input [1:0] x, output reg [1:0] y);\n  always @(posedge clk) y <= x;\nendmodule\n").unwrap();
    cfg.source = Some("m.v".into());
    assert!(matches!(load_design(&cfg, dir.path()), Err(CorpusError::TopMismatch { .. })));
    cfg.top_module = "m".into();
    let d = compare_design(&cfg, dir.path(), 64, 1).unwrap();
    assert_eq!(d.max.max, Score::FULL);
    cfg.source = Some("missing.v".into());
    assert!(matches!(load_design(&cfg, dir.path()), Err(CorpusError::Io { .. })));
}
