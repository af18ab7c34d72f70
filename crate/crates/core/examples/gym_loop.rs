//! The reset/step loop by hand, with a fixed action schedule.

use covgen::corpus;
use covgen::env::make_env;

fn main() -> anyhow::Result<()> {
    let e = corpus::entry("tap_fsm")?;
    let mut cfg = e.env_config()?;
    cfg.max_steps = 40;
    let mut env = make_env(cfg, e.ir()?)?;
    let obs = env.reset()?;
    println!("reset: coverage {:.4}, {} actions", obs.coverage, env.action_count());
    // TMS bits from a fixed pattern
    const PATTERN: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut step = 0;
    while !env.is_done() {
        let action = ((PATTERN >> (step % 64)) & 1) as usize;
        let r = env.step(action)?;
        println!(
            "step {:>2} tms={} reward {:>2} coverage {:>7}% done {}",
            step + 1,
            action,
            r.reward,
            r.info.score.percent_string(2),
            r.done
        );
        step += 1;
    }
    Ok(())
}
