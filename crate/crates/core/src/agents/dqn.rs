//! Deep Q-learning with uniform experience replay and a periodically
//! synchronized target network.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mlp::{argmax, Adam, Grads, Mlp};
use super::{AgentConfig, AgentError, Transition};

#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub q: Mlp,
    pub target: Mlp,
    opt: Adam,
    cfg: AgentConfig,
    actions: usize,
    rng: ChaCha8Rng,
    replay: Vec<Transition>,
    /// Next ring slot to overwrite once the buffer is full.
    head: usize,
    steps: u64,
    updates: u64,
}

/// Linear decay from `eps_start` to `eps_end` over `eps_decay_steps`.
pub fn epsilon_at(cfg: &AgentConfig, step: u64) -> f64 {
    if step >= cfg.eps_decay_steps {
        return cfg.eps_end;
    }
    let f = step as f64 / cfg.eps_decay_steps as f64;
    cfg.eps_start + (cfg.eps_end - cfg.eps_start) * f
}

impl DqnAgent {
    pub fn new(cfg: &AgentConfig, obs_dim: usize, actions: usize, seed: u64) -> Result<Self, AgentError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = Mlp::new(&cfg.sizes(obs_dim, actions), &mut rng)?;
        Ok(Self {
            target: q.clone(),
            opt: Adam::new(&q, cfg.lr),
            q,
            cfg: cfg.clone(),
            actions,
            rng,
            replay: Vec::new(),
            head: 0,
            steps: 0,
            updates: 0,
        })
    }

    pub fn epsilon(&self) -> f64 {
        epsilon_at(&self.cfg, self.steps)
    }

    /// Overrides the exploration schedule position (0 restarts it).
    pub fn set_steps(&mut self, steps: u64) {
        self.steps = steps;
    }

    pub fn select_action(&mut self, obs: &[f64]) -> Result<usize, AgentError> {
        let eps = self.epsilon();
        self.steps += 1;
        let q = self.q.forward(obs)?;
        if self.rng.gen::<f64>() < eps {
            Ok(self.rng.gen_range(0..self.actions))
        } else {
            Ok(argmax(&q))
        }
    }

    pub fn observe(&mut self, t: Transition) {
        if self.replay.len() < self.cfg.replay_capacity {
            self.replay.push(t);
        } else {
            self.replay[self.head] = t;
            self.head = (self.head + 1) % self.cfg.replay_capacity;
        }
    }

    /// Replay contents, oldest first.
    pub fn replay(&self) -> impl Iterator<Item = &Transition> {
        self.replay[self.head..].iter().chain(&self.replay[..self.head])
    }

    pub fn ready(&self) -> bool {
        self.replay.len() >= self.cfg.batch_size
    }

    pub fn update(&mut self) -> Result<BTreeMap<String, f64>, AgentError> {
        if !self.ready() {
            return Err(AgentError::InsufficientData {
                have: self.replay.len(),
                need: self.cfg.batch_size,
            });
        }
        let batch: Vec<Transition> = (0..self.cfg.batch_size)
            .map(|_| self.replay[self.rng.gen_range(0..self.replay.len())].clone())
            .collect();
        self.update_on_batch(&batch)
    }

    /// One optimizer step on the mean squared TD error of `batch`.
    pub fn update_on_batch(&mut self, batch: &[Transition]) -> Result<BTreeMap<String, f64>, AgentError> {
        if batch.is_empty() {
            return Err(AgentError::InsufficientData { have: 0, need: 1 });
        }
        let n = batch.len() as f64;
        let mut grads = Grads::zeros_like(&self.q);
        let mut loss = 0.0;
        for t in batch {
            let bootstrap = if t.done {
                0.0
            } else {
                self.target.forward(&t.next_state)?.into_iter().fold(f64::NEG_INFINITY, f64::max)
            };
            let y = t.reward as f64 + self.cfg.gamma * bootstrap;
            let (q, cache) = self.q.forward_cached(&t.state)?;
            let err = q[t.action] - y;
            loss += err * err / n;
            let mut dy = vec![0.0; self.actions];
            dy[t.action] = 2.0 * err / n;
            grads.add(&self.q.backward(&cache, &dy)?);
        }
        self.opt.step(&mut self.q, &grads);
        self.updates += 1;
        if self.updates.is_multiple_of(self.cfg.target_sync) {
            self.target = self.q.clone();
        }
        Ok(BTreeMap::from([("loss".to_string(), loss)]))
    }
}
