//! Drive the ALU with every opcode and watch coverage grow.

use std::collections::BTreeMap;

use covgen::bits::BitVector;
use covgen::sim::{CoverageType, SimInstance};

fn main() -> anyhow::Result<()> {
    let ir = covgen::corpus::entry("alu")?.ir()?;
    let mut sim = SimInstance::elaborate(ir)?;
    println!("cycle opcode result     code     block    toggle");
    for op in 0..8u64 {
        let inputs = BTreeMap::from([
            ("a".to_string(), BitVector::new(32, 0x1234_5678)?),
            ("b".to_string(), BitVector::new(32, 0x0f0f_0f0f)?),
            ("opcode".to_string(), BitVector::new(3, op)?),
        ]);
        let (outputs, snap) = sim.step_cycle(&inputs)?;
        println!(
            "{:>5} {:>6} {:08x}  {:>7}% {:>7}% {:>7}%",
            snap.cycle,
            op,
            outputs["result"].value(),
            snap.score(CoverageType::Code).percent_string(2),
            snap.score(CoverageType::Block).percent_string(2),
            snap.score(CoverageType::Toggle).percent_string(2),
        );
    }
    Ok(())
}
