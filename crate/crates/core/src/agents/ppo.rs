//! Proximal policy optimization with the clipped surrogate objective.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::a2c::discounted_returns;
use super::mlp::{softmax, Adam, Grads, Mlp};
use super::{neg_entropy_grad, sample_categorical, AgentConfig, AgentError, Transition};

/// `min(r A, clip(r, 1-eps, 1+eps) A)`.
pub fn clipped_surrogate(ratio: f64, adv: f64, eps: f64) -> f64 {
    (ratio * adv).min(ratio.clamp(1.0 - eps, 1.0 + eps) * adv)
}

/// Derivative of [`clipped_surrogate`] with respect to the ratio.
pub fn surrogate_grad(ratio: f64, adv: f64, eps: f64) -> f64 {
    if ratio * adv <= ratio.clamp(1.0 - eps, 1.0 + eps) * adv {
        adv
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct PpoAgent {
    pub actor: Mlp,
    pub critic: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
    cfg: AgentConfig,
    actions: usize,
    rng: ChaCha8Rng,
    buffer: Vec<Transition>,
}

impl PpoAgent {
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

        let mut old_logp = Vec::with_capacity(self.buffer.len());
        let mut adv = Vec::with_capacity(self.buffer.len());
        for (t, ret) in self.buffer.iter().zip(&returns) {
            old_logp.push(self.policy(&t.state)?[t.action].ln());
            adv.push(ret - self.critic.forward(&t.state)?[0]);
        }
        if adv.len() > 1 {
            let mean = adv.iter().sum::<f64>() / n;
            let std = (adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
            if std > 1e-8 {
                adv.iter_mut().for_each(|a| *a = (*a - mean) / std);
            }
        }

        let (mut pl, mut vl, mut ent, mut clipped) = (0.0, 0.0, 0.0, 0usize);
        for epoch in 0..self.cfg.epochs {
            let last_epoch = epoch + 1 == self.cfg.epochs;
            let mut ga = Grads::zeros_like(&self.actor);
            let mut gc = Grads::zeros_like(&self.critic);
            for (i, t) in self.buffer.iter().enumerate() {
                let (logits, acache) = self.actor.forward_cached(&t.state)?;
                let p = softmax(&logits);
                let ratio = (p[t.action].ln() - old_logp[i]).exp();
                let g = surrogate_grad(ratio, adv[i], self.cfg.clip);
                let (h, neg_h) = neg_entropy_grad(&p);
                let dz: Vec<f64> = (0..self.actions)
                    .map(|j| {
                        let onehot = (j == t.action) as u8 as f64;
                        (-g * ratio * (onehot - p[j]) + self.cfg.entropy_coef * neg_h[j]) / n
                    })
                    .collect();
                ga.add(&self.actor.backward(&acache, &dz)?);

                let (v, vcache) = self.critic.forward_cached(&t.state)?;
                let err = v[0] - returns[i];
                gc.add(&self.critic.backward(&vcache, &[2.0 * self.cfg.value_coef * err / n])?);
                if last_epoch {
                    pl -= clipped_surrogate(ratio, adv[i], self.cfg.clip) / n;
                    vl += self.cfg.value_coef * err * err / n;
                    ent += h / n;
                    clipped += (g == 0.0 && adv[i] != 0.0) as usize;
                }
            }
            self.actor_opt.step(&mut self.actor, &ga);
            self.critic_opt.step(&mut self.critic, &gc);
        }
        self.buffer.clear();
        Ok(BTreeMap::from([
            ("clip_fraction".to_string(), clipped as f64 / n),
            ("entropy".to_string(), ent),
            ("policy_loss".to_string(), pl),
            ("value_loss".to_string(), vl),
        ]))
    }
}
