//! Serve stimulus over TCP to a mock simulator running in another thread.

use std::thread;

use covgen::bridge::client::{run_mock_session, MockDuv};
use covgen::bridge::{ServeLimits, Server};
use covgen::corpus;

fn main() -> anyhow::Result<()> {
    let e = corpus::entry("alu")?;
    let mut cfg = e.env_config()?;
    cfg.max_steps = 200;
    let server = Server::bind("127.0.0.1:0", cfg, e.ports()?)?;
    let addr = server.local_addr()?;
    println!("listening on {addr}");
    let handle = thread::spawn(move || server.serve(&ServeLimits { max_sessions: Some(1), ..Default::default() }));

    // the mock reports the fraction of opcodes it has seen
    let mut duv = MockDuv::new("opcode", 3);
    let run = run_mock_session(addr, "alu", &mut duv, 1000)?;
    println!("client: {} cycles, coverage {}%, last frame {:?}", run.cycles, run.coverage.percent_string(2), run.last);
    for end in handle.join().expect("server thread")? {
        println!("server: {end:?}");
    }
    Ok(())
}
