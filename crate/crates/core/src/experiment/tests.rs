use super::*;
use crate::hdl::parse_design;

const TAP: &str = include_str!("../../corpus/tap_fsm.v");
const ALU: &str = include_str!("../../corpus/alu.v");
const FIR: &str = include_str!("../../corpus/fir4.v");

fn tap_config(policy: PolicyKind, seed: u64) -> EnvConfig {
    let mut c = EnvConfig::new("tap_fsm", CoverageType::Fsm, &["tms"]);
    c.learning_policy = policy;
    c.max_steps = 400;
    c.seed = seed;
    c
}

#[test]
fn random_run_is_deterministic() {
    let ir = parse_design(TAP).unwrap();
    let cfg = tap_config(PolicyKind::Random, 7);
    let a = run_one(&ir, &cfg, Score::FULL).unwrap();
    let b = run_one(&ir, &cfg, Score::FULL).unwrap();
    assert_eq!(a.episode, b.episode);
    assert_eq!(a.stimuli_to_max, b.stimuli_to_max);
    assert_eq!(a.scheme_label(), "none");
}

#[test]
fn trajectories_are_monotone_and_start_at_reset() {
    let ir = parse_design(TAP).unwrap();
    for p in [PolicyKind::Random, PolicyKind::Ppo, PolicyKind::Dqn] {
        let r = run_one(&ir, &tap_config(p, 3), Score::FULL).unwrap();
        let t = &r.episode.trajectory;
        assert_eq!(t[0], (0, Score::new(1, 16)));
        assert!(t.windows(2).all(|w| w[0].1 <= w[1].1 && w[1].0 == w[0].0 + 1));
        assert_eq!(t.len() as u64, r.episode.steps() + 1);
        assert!(r.episode.steps() <= 400);
        assert_eq!(r.episode.breakdown.len(), t.len());
        match r.stimuli_to_max {
            Some(n) => assert_eq!(n, r.episode.steps(), "stops at the maximum"),
            None => assert_eq!(r.episode.steps(), 400),
        }
    }
}

#[test]
fn first_reaching_is_argfirst() {
    let ep = Episode {
        trajectory: vec![(0, Score::new(1, 4)), (1, Score::new(2, 4)), (2, Score::new(4, 4)), (3, Score::new(4, 4))],
        breakdown: vec![],
        actions: vec![0, 0, 0],
        rewards: vec![1, 1, 0],
        updates: 0,
    };
    assert_eq!(ep.first_reaching(Score::FULL), Some(2));
    assert_eq!(ep.first_reaching(Score::new(1, 8)), Some(0));
    let short = Episode { trajectory: ep.trajectory[..2].to_vec(), ..ep.clone() };
    assert_eq!(short.first_reaching(Score::FULL), None);
}

#[test]
fn empty_design_is_done_at_reset() {
    let ir = parse_design("module e; endmodule").unwrap();
    let mut cfg = EnvConfig::new("e", CoverageType::Code, &[]);
    cfg.learning_policy = PolicyKind::Random;
    let r = run_one(&ir, &cfg, Score::FULL).unwrap();
    assert_eq!(r.stimuli_to_max, Some(0));
    assert_eq!(r.episode.steps(), 0);
}

#[test]
fn maximum_probe() {
    let fir = parse_design(FIR).unwrap();
    let cfg = EnvConfig::new("fir4", CoverageType::Toggle, &["x"]);
    let m = find_max_coverage(&fir, &cfg, 2000, 2).unwrap();
    assert!(m.max.is_full(), "{}", m.max);
    assert_eq!(m.method, ProbeMethod::ExhaustiveAndRandom);

    // every opcode reaches its own case item; the default is dead
    let alu = parse_design(ALU).unwrap();
    let cfg = EnvConfig::new("alu", CoverageType::Block, &["opcode"]);
    let m = find_max_coverage(&alu, &cfg, 8, 0).unwrap();
    assert_eq!(m.max, Score::new(9, 10));
    assert_eq!(m.method, ProbeMethod::Exhaustive);

    let tap = parse_design(TAP).unwrap();
    let m = find_max_coverage(&tap, &tap_config(PolicyKind::Random, 0), 0, 4).unwrap();
    assert_eq!(m.max, Score::new(1, 16));
}

#[test]
fn median_rendering() {
    assert_eq!(median_cell(&[Some(5), Some(1), Some(3)], 10), "3");
    assert_eq!(median_cell(&[Some(4), Some(1)], 10), "2.5");
    assert_eq!(median_cell(&[Some(4), None, None], 10), ">10");
    assert_eq!(median_cell(&[Some(4), Some(6), None], 10), "6");
    assert_eq!(median_cell(&[Some(4), None], 10), ">10");
}

#[test]
fn summary_schema_and_censoring() {
    let ir = parse_design(TAP).unwrap();
    let mut cfg = tap_config(PolicyKind::Random, 0);
    cfg.max_steps = 3;
    let d = CompareDesign {
        max: find_max_coverage(&ir, &cfg, 200, 2).unwrap(),
        ir,
        config: cfg,
    };
    let report = compare(std::slice::from_ref(&d), &[], 3).unwrap();
    assert_eq!(report.records.len(), 3);
    let csv = report.summary_csv();
    assert_eq!(csv, "design,max_coverage,random\ntap_fsm,100.00,>3\n");

    let combos: Vec<_> = PolicyKind::LEARNING
        .iter()
        .flat_map(|p| RewardScheme::ALL.iter().map(move |s| (*p, *s)))
        .collect();
    let report = compare(&[d], &combos, 1).unwrap();
    assert_eq!(
        report.header(),
        "design,max_coverage,random,ppo_optimistic,ppo_penalty,a2c_optimistic,a2c_penalty,dqn_optimistic,dqn_penalty"
    );
    let names: Vec<String> = report.trajectory_csvs().into_iter().map(|(n, _)| n).collect();
    assert!(names.contains(&"trajectory_tap_fsm_random_none_0.csv".to_string()));
    assert!(names.contains(&"trajectory_tap_fsm_dqn_penalty_0.csv".to_string()));
    assert_eq!(names.len(), 7);
}

#[test]
fn outputs_are_byte_stable() {
    let ir = parse_design(TAP).unwrap();
    let cfg = tap_config(PolicyKind::Random, 11);
    let d = CompareDesign {
        max: find_max_coverage(&ir, &cfg, 500, 2).unwrap(),
        ir,
        config: cfg,
    };
    let combos = [(PolicyKind::A2c, RewardScheme::Penalty), (PolicyKind::Dqn, RewardScheme::Optimistic)];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = write_outputs(&compare(std::slice::from_ref(&d), &combos, 2).unwrap(), a.path()).unwrap();
    let fb = write_outputs(&compare(&[d], &combos, 2).unwrap(), b.path()).unwrap();
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
    }
}
