//! Stimuli-to-maximum medians for random and every learning policy.
//!
//!     cargo run --release --example compare_policies [seeds] [out-dir]

use std::path::Path;

use covgen::agents::PolicyKind;
use covgen::corpus::{self, compare_design};
use covgen::env::RewardScheme;
use covgen::experiment::{compare, write_outputs};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let out = args.next();

    let mut designs = Vec::new();
    for name in ["tap_fsm", "alu"] {
        let cfg = corpus::entry(name)?.env_config()?;
        designs.push(compare_design(&cfg, Path::new("."), 5000, 8)?);
    }
    let combos: Vec<_> = PolicyKind::LEARNING
        .iter()
        .flat_map(|&p| [(p, RewardScheme::Optimistic), (p, RewardScheme::Penalty)])
        .collect();
    let report = compare(&designs, &combos, seeds)?;
    print!("{}", report.summary_csv());
    if let Some(dir) = out {
        let files = write_outputs(&report, Path::new(&dir))?;
        println!("{} files in {dir}", files.len());
    }
    Ok(())
}
