#![allow(dead_code)]

pub mod oracle;

use covgen::hdl::{parse_design, DesignIR};
use covgen::sim::{CoverageDb, SimInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DESIGNS: [(&str, &str); 4] = [
    ("alu", include_str!("../../corpus/alu.v")),
    ("tap_fsm", include_str!("../../corpus/tap_fsm.v")),
    ("fifo_sync", include_str!("../../corpus/fifo_sync.v")),
    ("fir4", include_str!("../../corpus/fir4.v")),
];

pub fn design(name: &str) -> DesignIR {
    let src = DESIGNS.iter().find(|(n, _)| *n == name).expect("corpus design").1;
    parse_design(src).unwrap()
}

/// Drives `cycles` uniformly random input vectors with tracing enabled.
/// Reset-like ports are asserted one cycle in eight.
pub fn random_run(ir: DesignIR, cycles: usize, seed: u64) -> SimInstance {
    let mut sim = SimInstance::elaborate(ir).unwrap();
    sim.enable_trace();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ports: Vec<(u32, Option<bool>)> = sim
        .input_ports()
        .iter()
        .map(|&p| {
            let s = sim.ir().signal(p);
            let reset = match s.name.as_str() {
                "rst" | "reset" => Some(true),
                "rst_n" | "reset_n" => Some(false),
                _ => None,
            };
            (s.width, reset)
        })
        .collect();
    let mut values = vec![0u64; ports.len()];
    for _ in 0..cycles {
        for (v, (w, reset)) in values.iter_mut().zip(&ports) {
            *v = match reset {
                Some(high) => (rng.gen_ratio(1, 8) == *high) as u64,
                None => rng.gen::<u64>() & covgen::bits::mask(*w),
            };
        }
        sim.step_values(&values);
    }
    sim
}

/// Compares the instrumented database with the oracle, naming the first
/// differing category.
pub fn matches_oracle(db: &CoverageDb, o: &oracle::OracleCoverage) -> Result<(), String> {
    let checks = [
        ("block", db.blocks == o.blocks),
        ("toggle rise", db.toggle_rose == o.toggle_rose),
        ("toggle fall", db.toggle_fell == o.toggle_fell),
        ("fsm state", db.fsm_states == o.fsm_states),
        ("fsm arc", db.fsm_arcs == o.fsm_arcs),
        ("expr true", db.expr_true == o.expr_true),
        ("expr false", db.expr_false == o.expr_false),
    ];
    match checks.iter().find(|(_, ok)| !ok) {
        Some((what, _)) => Err(format!("{what} coverage differs from oracle")),
        None => Ok(()),
    }
}
