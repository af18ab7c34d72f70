//! Probe each built-in design's reachable maximum under every coverage type.

use covgen::corpus::ENTRIES;
use covgen::experiment::{find_max_coverage, maxcov_csv};
use covgen::sim::CoverageType;

fn main() -> anyhow::Result<()> {
    let mut records = Vec::new();
    for e in ENTRIES {
        let ir = e.ir()?;
        let mut cfg = e.env_config()?;
        for ty in [CoverageType::Code, CoverageType::Block, CoverageType::Toggle, CoverageType::Fsm] {
            cfg.coverage_type = ty;
            records.push(find_max_coverage(&ir, &cfg, 1000, 4)?);
        }
    }
    print!("{}", maxcov_csv(&records));
    Ok(())
}
