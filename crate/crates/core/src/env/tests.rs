use proptest::prelude::*;

use super::*;
use crate::hdl::parse_design;

const ALU: &str = include_str!("../../corpus/alu.v");
const TAP: &str = include_str!("../../corpus/tap_fsm.v");

fn alu_env(ports: &[&str]) -> Result<Env<SimBackend>, EnvError> {
    make_env(EnvConfig::new("alu", CoverageType::Block, ports), parse_design(ALU).unwrap())
}

fn tap_env(max_steps: u64, scheme: RewardScheme) -> Env<SimBackend> {
    let mut cfg = EnvConfig::new("tap_fsm", CoverageType::Fsm, &["tms"]);
    cfg.max_steps = max_steps;
    cfg.reward_scheme = scheme;
    make_env(cfg, parse_design(TAP).unwrap()).unwrap()
}

#[test]
fn action_space_from_ports() {
    assert_eq!(alu_env(&["opcode"]).unwrap().action_count(), 8);
    assert!(matches!(alu_env(&["a", "b"]), Err(EnvError::ActionSpaceTooLarge { bits: 64, cap_bits: 20 })));
    assert!(matches!(alu_env(&["clk"]), Err(EnvError::ClockAsActionPort(p)) if p == "clk"));
    assert!(matches!(alu_env(&["result"]), Err(EnvError::NotAnInput(_))));
    assert!(matches!(alu_env(&["nope"]), Err(EnvError::UnknownPort(_))));
    let wrong = make_env(EnvConfig::new("fifo", CoverageType::Block, &[]), parse_design(ALU).unwrap());
    assert!(matches!(wrong, Err(EnvError::DesignMismatch { .. })));
}

#[test]
fn reset_runs_one_cycle_and_is_repeatable() {
    let mut env = alu_env(&["opcode"]).unwrap();
    assert!(matches!(env.step(0), Err(EnvError::NotReset)));
    let a = env.reset().unwrap();
    assert_eq!(env.last_sample().unwrap().cycle, 1);
    assert!(a.coverage >= 0.0);
    env.step(3).unwrap();
    let b = env.reset().unwrap();
    assert_eq!(a, b);
    assert_eq!(env.steps(), 0);
}

#[test]
fn tap_reset_lands_in_reset_state() {
    let mut env = tap_env(10, RewardScheme::Optimistic);
    let obs = env.reset().unwrap();
    assert_eq!(obs.coverage, 1.0 / 16.0);
    assert_eq!(env.backend().sim().peek("state").unwrap().value(), 0);
    // rst_n was driven low for the reset cycle and released afterwards
    env.step(0).unwrap();
    assert_eq!(env.backend().sim().peek("state").unwrap().value(), 1);
}

#[test]
fn action_drives_the_port() {
    let mut env = alu_env(&["opcode"]).unwrap();
    env.reset().unwrap();
    let r = env.step(6).unwrap();
    assert_eq!(env.backend().sim().peek("opcode").unwrap().to_bin_string(), "110");
    assert!(env.backend().sim().coverage().blocks[7]);
    assert_eq!(r.reward, 1);
    assert!(matches!(env.step(8), Err(EnvError::IndexOutOfRange { index: 8, size: 8 })));
}

#[test]
fn budget_termination() {
    let mut env = tap_env(5, RewardScheme::Penalty);
    env.reset().unwrap();
    for i in 0..5 {
        // tms=1 holds the reset state, so nothing new is covered
        let r = env.step(1).unwrap();
        assert_eq!(r.reward, -1);
        assert_eq!(r.done, i == 4);
    }
    assert!(matches!(env.step(1), Err(EnvError::EpisodeFinished)));
}

#[test]
fn target_termination() {
    let mut cfg = EnvConfig::new("tap_fsm", CoverageType::Fsm, &["tms"]);
    cfg.target = Score::from_percent_str("25").unwrap();
    let mut env = make_env(cfg, parse_design(TAP).unwrap()).unwrap();
    env.reset().unwrap();
    let dones: Vec<bool> = [0, 1, 0].iter().map(|&a| env.step(a).unwrap().done).collect();
    assert_eq!(dones, vec![false, false, true]);
}

#[test]
fn held_and_random_fill() {
    let mut env = alu_env(&["opcode"]).unwrap();
    env.reset().unwrap();
    env.step(0).unwrap();
    assert_eq!(env.backend().sim().peek("a").unwrap().value(), 0);

    let mut cfg = EnvConfig::new("alu", CoverageType::Toggle, &["opcode"]);
    cfg.fill_inputs = FillPolicy::Random;
    cfg.seed = 3;
    let mut env = make_env(cfg.clone(), parse_design(ALU).unwrap()).unwrap();
    env.reset().unwrap();
    assert_eq!(env.backend().sim().peek("a").unwrap().value(), 0);
    let r1 = env.step(0).unwrap();
    assert_ne!(env.backend().sim().peek("a").unwrap().value(), 0);
    let mut again = make_env(cfg, parse_design(ALU).unwrap()).unwrap();
    again.reset().unwrap();
    assert_eq!(again.step(0).unwrap(), r1);
}

#[test]
fn augmented_observation_layout() {
    let mut cfg = EnvConfig::new("tap_fsm", CoverageType::Fsm, &["tms"]);
    cfg.observation = ObservationMode::Augmented;
    let mut env = make_env(cfg, parse_design(TAP).unwrap()).unwrap();
    assert_eq!(env.obs_dim(), 7);
    let o = env.reset().unwrap();
    assert_eq!(o.features().len(), 7);
    assert_eq!(&o.features()[5..], &[0.0, 0.0]);
    let r = env.step(1).unwrap();
    assert_eq!(&r.observation.features()[5..], &[0.0, 1.0]);
    assert_eq!(r.observation.features()[3], 1.0 / 16.0);

    let mut cfg = EnvConfig::new("alu", CoverageType::Block, &["opcode", "b"]);
    cfg.observation = ObservationMode::Augmented;
    assert!(matches!(
        make_env(cfg, parse_design(ALU).unwrap()),
        Err(EnvError::ActionSpaceTooLarge { .. })
    ));
    let mut cfg = EnvConfig::new("alu", CoverageType::Block, &["opcode"]);
    cfg.observation = ObservationMode::Augmented;
    assert!(make_env(cfg, parse_design(ALU).unwrap()).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn episode_reward_and_done_properties(actions in prop::collection::vec(0usize..2, 1..120), penalty in any::<bool>(), budget in 1u64..100) {
        let scheme = if penalty { RewardScheme::Penalty } else { RewardScheme::Optimistic };
        let mut env = tap_env(budget, scheme);
        env.reset().unwrap();
        let mut prev = env.score();
        let mut positive = 0;
        let mut increases = 0;
        for a in actions {
            if env.is_done() {
                break;
            }
            let r = env.step(a).unwrap();
            let cur = r.info.score;
            prop_assert!(cur >= prev);
            if cur > prev {
                increases += 1;
            }
            if r.reward > 0 {
                positive += r.reward;
            }
            let miss = if penalty { -1 } else { 0 };
            prop_assert!(r.reward == 1 || r.reward == miss);
            prop_assert_eq!(r.done, cur.is_full() || env.steps() == budget);
            prev = cur;
        }
        prop_assert_eq!(positive, increases);
    }
}
