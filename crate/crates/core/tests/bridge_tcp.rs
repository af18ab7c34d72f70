use std::thread;

use covgen::agents::PolicyKind;
use covgen::bridge::client::{run_mock_session, MockDuv};
use covgen::bridge::{replay, ServeLimits, Server, SessionEnd, Transcript, WireMessage};
use covgen::corpus;
use covgen::sim::CoverageType;

const GOLDEN: &str = "tests/golden/alu_session.log";

fn alu_server(policy: PolicyKind) -> (Server, covgen::env::EnvConfig) {
    let e = corpus::entry("alu").unwrap();
    let mut cfg = e.env_config().unwrap();
    cfg.learning_policy = policy;
    cfg.coverage_type = CoverageType::Block;
    cfg.fill_inputs = Default::default();
    cfg.max_steps = 100;
    cfg.seed = 2024;
    (Server::bind("127.0.0.1:0", cfg.clone(), e.ports().unwrap()).unwrap(), cfg)
}

#[test]
fn mock_client_session_over_tcp() {
    let (server, cfg) = alu_server(PolicyKind::Random);
    let addr = server.local_addr().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let limits = ServeLimits {
        max_sessions: Some(1),
        transcript_dir: Some(dir.path().to_path_buf()),
        ..Default::default()
    };
    let handle = thread::spawn(move || server.serve(&limits).unwrap());
    let mut duv = MockDuv::new("opcode", 3);
    let run = run_mock_session(addr, "alu", &mut duv, 100).unwrap();
    assert_eq!(handle.join().unwrap(), vec![SessionEnd::Done("target".into())]);
    assert!(matches!(run.last, Some(WireMessage::Done { ref reason }) if reason == "target"));
    assert!(run.coverage.is_full());

    let text = std::fs::read_to_string(dir.path().join("session_0.log")).unwrap();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(GOLDEN, &text).unwrap();
    }
    assert_eq!(text, std::fs::read_to_string(GOLDEN).unwrap());

    let e = corpus::entry("alu").unwrap();
    let again = replay(&cfg, &e.ports().unwrap(), &Transcript::parse(&text).unwrap()).unwrap();
    assert_eq!(again.to_text(), text);
}

#[test]
fn sequential_clients_and_refusals() {
    let (server, _) = alu_server(PolicyKind::Ppo);
    let addr = server.local_addr().unwrap();
    let limits = ServeLimits {
        max_sessions: Some(2),
        ..Default::default()
    };
    let handle = thread::spawn(move || server.serve(&limits).unwrap());
    let mut wrong = MockDuv::new("opcode", 3);
    let run = run_mock_session(addr, "fifo_sync", &mut wrong, 10).unwrap();
    assert!(matches!(run.last, Some(WireMessage::Error { .. })));
    let mut duv = MockDuv::new("opcode", 3);
    let run = run_mock_session(addr, "alu", &mut duv, 200).unwrap();
    assert!(matches!(run.last, Some(WireMessage::Done { .. })));
    let ends = handle.join().unwrap();
    assert!(matches!(ends[0], SessionEnd::Error(_)));
    assert!(matches!(ends[1], SessionEnd::Done(_)));
}
