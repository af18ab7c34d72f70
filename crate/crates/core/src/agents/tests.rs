use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dqn::epsilon_at;
use super::mlp::Layer;
use super::*;

fn cfg(kind: PolicyKind) -> AgentConfig {
    AgentConfig::new(kind)
}

fn t(state: f64, action: usize, reward: i32, done: bool) -> Transition {
    Transition {
        state: vec![state],
        action,
        reward,
        next_state: vec![state],
        done,
    }
}

#[test]
fn random_policy_is_uniform() {
    let mut a = new_agent(&cfg(PolicyKind::Random), 1, ActionSpace::Discrete(8), 5).unwrap();
    let mut counts = [0usize; 8];
    for _ in 0..80_000 {
        counts[a.select_action(&[0.0]).unwrap()] += 1;
    }
    for c in counts {
        assert!((c as f64 / 80_000.0 - 0.125).abs() < 0.01, "{counts:?}");
    }
    a.observe(t(0.0, 1, 1, false));
    assert!(!a.ready());
}

#[test]
fn shapes_and_seeded_init() {
    let a = new_agent(&cfg(PolicyKind::Dqn), 1, ActionSpace::Discrete(8), 3).unwrap();
    assert_eq!(a.networks()[0].output_dim(), 8);
    assert_eq!(a.networks()[0].sizes(), vec![1, 32, 32, 8]);
    let b = new_agent(&cfg(PolicyKind::Dqn), 1, ActionSpace::Discrete(8), 3).unwrap();
    assert_eq!(a.networks()[0], b.networks()[0]);
    let c = new_agent(&cfg(PolicyKind::Dqn), 1, ActionSpace::Discrete(8), 4).unwrap();
    assert_ne!(a.networks()[0], c.networks()[0]);
}

#[test]
fn dqn_is_discrete_only() {
    assert!(matches!(
        new_agent(&cfg(PolicyKind::Dqn), 1, ActionSpace::Continuous { dim: 2 }, 0),
        Err(AgentError::DiscreteOnly)
    ));
    for k in [PolicyKind::A2c, PolicyKind::Ppo] {
        assert!(matches!(
            new_agent(&cfg(k), 1, ActionSpace::Continuous { dim: 2 }, 0),
            Err(AgentError::Unsupported(_))
        ));
    }
}

#[test]
fn hyperparameters_validated() {
    let mut c = cfg(PolicyKind::Ppo);
    c.clip = 1.0;
    assert!(matches!(c.validate(), Err(AgentError::InvalidHyperparameter(_))));
    let mut c = cfg(PolicyKind::A2c);
    c.gamma = 0.0;
    assert!(c.validate().is_err());
    let mut c = cfg(PolicyKind::Dqn);
    c.lr = -1.0;
    assert!(new_agent(&c, 1, ActionSpace::Discrete(2), 0).is_err());
    let kv = [("lr".to_string(), "0.01".to_string()), ("hidden".to_string(), "16, 8".to_string())];
    let c = cfg(PolicyKind::Dqn).with_overrides(&kv.into_iter().collect()).unwrap();
    assert_eq!(c.lr, 0.01);
    assert_eq!(c.hidden, vec![16, 8]);
    let bad = [("nope".to_string(), "1".to_string())].into_iter().collect();
    assert!(cfg(PolicyKind::Dqn).with_overrides(&bad).is_err());
}

#[test]
fn greedy_dqn_takes_argmax() {
    let mut c = cfg(PolicyKind::Dqn);
    c.eps_start = 0.0;
    c.eps_end = 0.0;
    let mut a = DqnAgent::new(&c, 1, 3, 0).unwrap();
    a.q = Mlp::from_layers(vec![Layer {
        w: vec![0.0; 3],
        b: vec![0.1, 0.9, 0.3],
        inputs: 1,
        outputs: 3,
    }])
    .unwrap();
    for _ in 0..10 {
        assert_eq!(a.select_action(&[0.5]).unwrap(), 1);
    }
}

#[test]
fn equal_logits_sample_uniformly() {
    let mut c = cfg(PolicyKind::Ppo);
    c.hidden = vec![];
    let mut a = PpoAgent::new(&c, 2, 4, 11).unwrap();
    a.actor.set_params(&vec![0.0; a.actor.param_count()]).unwrap();
    let mut counts = [0usize; 4];
    for _ in 0..40_000 {
        counts[a.select_action(&[0.3, 0.7]).unwrap()] += 1;
    }
    for n in counts {
        assert!((n as f64 / 40_000.0 - 0.25).abs() < 0.01, "{counts:?}");
    }
}

#[test]
fn replay_ring_evicts_oldest() {
    let mut c = cfg(PolicyKind::Dqn);
    c.replay_capacity = 3;
    c.batch_size = 2;
    let mut a = DqnAgent::new(&c, 1, 2, 0).unwrap();
    for i in 0..4 {
        a.observe(t(i as f64, 0, 0, false));
        assert_eq!(a.ready(), i >= 1);
    }
    let states: Vec<f64> = a.replay().map(|t| t.state[0]).collect();
    assert_eq!(states, vec![1.0, 2.0, 3.0]);
}

#[test]
fn rollout_readiness() {
    let mut c = cfg(PolicyKind::A2c);
    c.rollout = 3;
    let mut a = new_agent(&c, 1, ActionSpace::Discrete(2), 0).unwrap();
    a.observe(t(0.0, 0, 0, false));
    a.observe(t(0.0, 1, 0, false));
    assert!(!a.ready());
    a.observe(t(0.0, 1, 1, false));
    assert!(a.ready());
    a.update().unwrap();
    assert!(!a.ready());
    assert!(matches!(a.update(), Err(AgentError::InsufficientData { .. })));
    a.observe(t(0.0, 1, 1, true));
    assert!(a.ready());
}

#[test]
fn epsilon_schedule() {
    let c = cfg(PolicyKind::Dqn);
    assert_eq!(epsilon_at(&c, 0), 1.0);
    assert!((epsilon_at(&c, 250) - 0.525).abs() < 1e-12);
    let mut prev = f64::INFINITY;
    for s in 0..1000 {
        let e = epsilon_at(&c, s);
        assert!(e <= prev);
        if s >= 500 {
            assert_eq!(e, 0.05);
        }
        prev = e;
    }
}

#[test]
fn dqn_gamma_zero_regresses_to_reward() {
    let mut c = cfg(PolicyKind::Dqn);
    // below the validated range on purpose: no bootstrap term at all
    c.gamma = 0.0;
    c.lr = 3e-4;
    let mut a = DqnAgent::new(&c, 1, 4, 7).unwrap();
    let batch = vec![t(0.25, 2, 1, false); 16];
    // with no bootstrap the TD target is the reward itself
    let q0 = a.q.forward(&[0.25]).unwrap()[2];
    let first = a.update_on_batch(&batch).unwrap()["loss"];
    assert!((first - (q0 - 1.0).powi(2)).abs() < 1e-12);
    let mut prev = first;
    for _ in 1..50 {
        let loss = a.update_on_batch(&batch).unwrap()["loss"];
        assert!(loss < prev, "{loss} !< {prev}");
        prev = loss;
    }
    assert!(prev < first / 4.0, "{prev} vs {first}");
}

#[test]
fn returns_by_hand() {
    let r = discounted_returns(&[1.0, 1.0, 1.0], &[false, false, true], 0.5, 123.0);
    assert_eq!(r, vec![1.75, 1.5, 1.0]);
    let r = discounted_returns(&[0.0, 1.0], &[false, false], 0.5, 2.0);
    assert_eq!(r, vec![1.0, 2.0]);
    let r = discounted_returns(&[1.0, 0.0, 1.0], &[true, false, false], 1.0, 0.0);
    assert_eq!(r, vec![1.0, 1.0, 1.0]);
}

#[test]
fn ppo_surrogate_clipping() {
    for adv in [-2.0, -0.5, 0.5, 3.0] {
        assert_eq!(clipped_surrogate(1.0, adv, 0.2), adv);
        assert_eq!(surrogate_grad(1.0, adv, 0.2), adv);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..1000 {
        let r: f64 = rng.gen_range(0.0..3.0);
        let a: f64 = rng.gen_range(-2.0..2.0);
        let g = surrogate_grad(r, a, 0.2);
        let pushes_out = (r > 1.2 && a > 0.0) || (r < 0.8 && a < 0.0);
        if pushes_out {
            assert_eq!(g, 0.0);
        } else {
            assert_eq!(g, a);
        }
        assert!(clipped_surrogate(r, a, 0.2) <= r * a + 1e-12);
    }
}

/// Two-armed bandit: action 1 pays, action 0 costs.
fn bandit(kind: PolicyKind, seed: u64) -> AgentPolicy {
    let mut c = cfg(kind);
    c.rollout = 8;
    c.batch_size = 8;
    c.eps_decay_steps = 100;
    let mut a = new_agent(&c, 1, ActionSpace::Discrete(2), seed).unwrap();
    for _ in 0..400 {
        let act = a.select_action(&[0.5]).unwrap();
        let r = if act == 1 { 1 } else { -1 };
        a.observe(Transition {
            state: vec![0.5],
            action: act,
            reward: r,
            next_state: vec![0.5],
            done: true,
        });
        if a.ready() {
            a.update().unwrap();
        }
    }
    a
}

#[test]
fn learners_prefer_the_paying_arm() {
    match bandit(PolicyKind::Dqn, 1) {
        AgentPolicy::Dqn(d) => {
            let q = d.q.forward(&[0.5]).unwrap();
            assert!(q[1] > q[0], "{q:?}");
        }
        _ => unreachable!(),
    }
    match bandit(PolicyKind::A2c, 1) {
        AgentPolicy::A2c(a) => assert!(a.policy(&[0.5]).unwrap()[1] > 0.9),
        _ => unreachable!(),
    }
    match bandit(PolicyKind::Ppo, 1) {
        AgentPolicy::Ppo(a) => assert!(a.policy(&[0.5]).unwrap()[1] > 0.9),
        _ => unreachable!(),
    }
}

#[test]
fn training_is_bit_reproducible() {
    for k in PolicyKind::LEARNING {
        let a = bandit(k, 9);
        let b = bandit(k, 9);
        let pa: Vec<Vec<f64>> = a.networks().iter().map(|n| n.params()).collect();
        let pb: Vec<Vec<f64>> = b.networks().iter().map(|n| n.params()).collect();
        assert_eq!(pa, pb);
    }
}

#[test]
fn checkpoint_round_trip() {
    for k in PolicyKind::LEARNING {
        let trained = bandit(k, 2);
        let mut bytes = Vec::new();
        checkpoint::write_checkpoint(&trained, &mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"CVGW");
        let mut fresh = new_agent(&cfg(k), 1, ActionSpace::Discrete(2), 99).unwrap();
        checkpoint::load_checkpoint(&mut fresh, &mut bytes.as_slice()).unwrap();
        let a: Vec<Vec<f64>> = trained.networks().iter().map(|n| n.params()).collect();
        let b: Vec<Vec<f64>> = fresh.networks().iter().map(|n| n.params()).collect();
        assert_eq!(a, b);

        let mut wrong = new_agent(&cfg(k), 1, ActionSpace::Discrete(3), 0).unwrap();
        assert!(checkpoint::load_checkpoint(&mut wrong, &mut bytes.as_slice()).is_err());
        bytes[0] = b'X';
        assert!(checkpoint::read_checkpoint(&mut bytes.as_slice()).is_err());
    }
}

#[test]
fn finite_difference_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..20 {
        let depth = rng.gen_range(0..3);
        let mut sizes = vec![rng.gen_range(1..5)];
        sizes.extend((0..depth).map(|_| rng.gen_range(1..6)));
        sizes.push(rng.gen_range(1..4));
        let mut net = Mlp::new(&sizes, &mut rng).unwrap();
        let x: Vec<f64> = (0..sizes[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let target: Vec<f64> = (0..net.output_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let loss = |n: &Mlp| -> f64 {
            let y = n.forward(&x).unwrap();
            0.5 * y.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
        };
        let (y, c) = net.forward_cached(&x).unwrap();
        let dy: Vec<f64> = y.iter().zip(&target).map(|(a, b)| a - b).collect();
        let analytic = net.backward(&c, &dy).unwrap().flat();
        let p0 = net.params();
        for i in 0..p0.len() {
            let mut p = p0.clone();
            p[i] += 1e-5;
            net.set_params(&p).unwrap();
            let up = loss(&net);
            p[i] -= 2e-5;
            net.set_params(&p).unwrap();
            let down = loss(&net);
            let numeric = (up - down) / 2e-5;
            let err = (analytic[i] - numeric).abs();
            let scale = analytic[i].abs().max(numeric.abs());
            assert!(err <= 1e-8 || err / scale < 1e-4, "case {case} param {i}: {} vs {numeric}", analytic[i]);
        }
        net.set_params(&p0).unwrap();
    }
}
