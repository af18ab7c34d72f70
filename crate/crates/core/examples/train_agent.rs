//! Train PPO on the FIFO for a few episodes, then save a checkpoint.
//!
//!     cargo run --release --example train_agent [checkpoint-path]

use covgen::agents::checkpoint::{load_checkpoint, write_checkpoint};
use covgen::agents::PolicyKind;
use covgen::corpus;
use covgen::env::make_env;
use covgen::experiment::{build_agent, run_episode};

fn main() -> anyhow::Result<()> {
    let e = corpus::entry("fifo_sync")?;
    let mut cfg = e.env_config()?;
    cfg.learning_policy = PolicyKind::Ppo;
    cfg.max_steps = 300;
    let mut env = make_env(cfg.clone(), e.ir()?)?;
    let mut agent = build_agent(&env, &cfg)?;
    for ep in 0..5 {
        let run = run_episode(&mut env, &mut agent, true)?;
        println!(
            "episode {ep}: {} steps, final {}%, {} updates",
            run.steps(),
            run.final_score().percent_string(2),
            run.updates
        );
    }

    let mut bytes = Vec::new();
    write_checkpoint(&agent, &mut bytes)?;
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, &bytes)?;
        println!("checkpoint written to {path}");
    }
    let mut fresh = build_agent(&env, &cfg)?;
    load_checkpoint(&mut fresh, &mut bytes.as_slice())?;
    println!("checkpoint: {} bytes, reloads into a fresh agent", bytes.len());
    Ok(())
}
