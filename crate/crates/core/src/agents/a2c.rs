//! Synchronous advantage actor-critic with n-step returns.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mlp::{softmax, Adam, Grads, Mlp};
use super::{neg_entropy_grad, sample_categorical, AgentConfig, AgentError, Transition};

/// `R_t = r_t + gamma * R_{t+1}`, cut at terminal steps, seeded with
/// `bootstrap` after the last step.
pub fn discounted_returns(rewards: &[f64], dones: &[bool], gamma: f64, bootstrap: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut next = bootstrap;
    for t in (0..rewards.len()).rev() {
        if dones[t] {
            next = 0.0;
        }
        out[t] = rewards[t] + gamma * next;
        next = out[t];
    }
    out
}

#[derive(Debug, Clone)]
pub struct A2cAgent {
    pub actor: Mlp,
    pub critic: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
    cfg: AgentConfig,
    actions: usize,
    rng: ChaCha8Rng,
    buffer: Vec<Transition>,
}

impl A2cAgent {
    pub fn new(cfg: &AgentConfig, obs_dim: usize, actions: usize, seed: u64) -> Result<Self, AgentError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let actor = Mlp::new(&cfg.sizes(obs_dim, actions), &mut rng)?;
        let critic = Mlp::new(&cfg.sizes(obs_dim, 1), &mut rng)?;
        Ok(Self {
            actor_opt: Adam::new(&actor, cfg.lr),
            critic_opt: Adam::new(&critic, cfg.lr),
            actor,
            critic,
            cfg: cfg.clone(),
            actions,
            rng,
            buffer: Vec::new(),
        })
    }

    pub fn policy(&self, obs: &[f64]) -> Result<Vec<f64>, AgentError> {
        Ok(softmax(&self.actor.forward(obs)?))
    }

    pub fn select_action(&mut self, obs: &[f64]) -> Result<usize, AgentError> {
        let p = self.policy(obs)?;
        Ok(sample_categorical(&p, &mut self.rng))
    }

    pub fn observe(&mut self, t: Transition) {
        self.buffer.push(t);
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    pub fn ready(&self) -> bool {
        self.buffer.len() >= self.cfg.rollout || self.buffer.last().is_some_and(|t| t.done)
    }

    pub fn update(&mut self) -> Result<BTreeMap<String, f64>, AgentError> {
        let Some(last) = self.buffer.last() else {
            return Err(AgentError::InsufficientData {
                have: 0,
                need: self.cfg.rollout,
            });
        };
        let bootstrap = if last.done { 0.0 } else { self.critic.forward(&last.next_state)?[0] };
        let rewards: Vec<f64> = self.buffer.iter().map(|t| t.reward as f64).collect();
        let dones: Vec<bool> = self.buffer.iter().map(|t| t.done).collect();
        let returns = discounted_returns(&rewards, &dones, self.cfg.gamma, bootstrap);
        let n = self.buffer.len() as f64;

        let mut ga = Grads::zeros_like(&self.actor);
        let mut gc = Grads::zeros_like(&self.critic);
        let (mut pl, mut vl, mut ent) = (0.0, 0.0, 0.0);
        for (t, ret) in self.buffer.iter().zip(&returns) {
            let (v, vcache) = self.critic.forward_cached(&t.state)?;
            let adv = ret - v[0];
            vl += self.cfg.value_coef * adv * adv / n;
            gc.add(&self.critic.backward(&vcache, &[-2.0 * self.cfg.value_coef * adv / n])?);

            let (logits, acache) = self.actor.forward_cached(&t.state)?;
            let p = softmax(&logits);
            let (h, neg_h) = neg_entropy_grad(&p);
            pl -= p[t.action].ln() * adv / n;
            ent += h / n;
            let dz: Vec<f64> = (0..self.actions)
                .map(|j| {
                    let onehot = (j == t.action) as u8 as f64;
                    ((p[j] - onehot) * adv + self.cfg.entropy_coef * neg_h[j]) / n
                })
                .collect();
            ga.add(&self.actor.backward(&acache, &dz)?);
        }
        self.actor_opt.step(&mut self.actor, &ga);
        self.critic_opt.step(&mut self.critic, &gc);
        self.buffer.clear();
        Ok(BTreeMap::from([
            ("entropy".to_string(), ent),
            ("policy_loss".to_string(), pl),
            ("value_loss".to_string(), vl),
        ]))
    }
}
