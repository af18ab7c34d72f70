//! Learning policies behind one interface: uniform random, DQN, A2C and PPO.

pub mod a2c;
pub mod checkpoint;
pub mod dqn;
pub mod mlp;
pub mod ppo;
pub mod random;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use a2c::{discounted_returns, A2cAgent};
pub use dqn::DqnAgent;
pub use mlp::{Adam, Grads, Mlp};
pub use ppo::{clipped_surrogate, surrogate_grad, PpoAgent};
pub use random::RandomAgent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Random,
    Dqn,
    A2c,
    Ppo,
}

impl PolicyKind {
    pub const LEARNING: [PolicyKind; 3] = [PolicyKind::Ppo, PolicyKind::A2c, PolicyKind::Dqn];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::Dqn => "dqn",
            PolicyKind::A2c => "a2c",
            PolicyKind::Ppo => "ppo",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(PolicyKind::Random),
            "dqn" => Ok(PolicyKind::Dqn),
            "a2c" => Ok(PolicyKind::A2c),
            "ppo" => Ok(PolicyKind::Ppo),
            other => Err(format!("unknown learning policy `{other}`")),
        }
    }
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("DQN needs a discrete action space")]
    DiscreteOnly,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("not enough data to update ({have} of {need})")]
    InsufficientData { have: usize, need: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The action space an agent acts in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActionSpace {
    Discrete(usize),
    /// Box-shaped continuous actions; no agent here implements them.
    Continuous { dim: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub kind: PolicyKind,
    pub lr: f64,
    pub gamma: f64,
    pub hidden: Vec<usize>,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay_steps: u64,
    pub target_sync: u64,
    pub rollout: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub clip: f64,
    pub epochs: usize,
}

impl AgentConfig {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            lr: 3e-3,
            gamma: 0.99,
            hidden: vec![32, 32],
            replay_capacity: 2048,
            batch_size: 64,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_steps: 500,
            target_sync: 100,
            rollout: 32,
            entropy_coef: 0.01,
            value_coef: 0.5,
            clip: 0.2,
            epochs: 4,
        }
    }

    /// Applies `agent.*` overrides from an environment config.
    pub fn with_overrides(mut self, kv: &BTreeMap<String, String>) -> Result<Self, AgentError> {
        fn num<T: FromStr>(k: &str, v: &str) -> Result<T, AgentError> {
            v.parse().map_err(|_| AgentError::InvalidHyperparameter(format!("{k} = {v}")))
        }
        for (k, v) in kv {
            match k.as_str() {
                "lr" => self.lr = num(k, v)?,
                "gamma" => self.gamma = num(k, v)?,
                "hidden" => {
                    self.hidden = v
                        .split(',')
                        .map(|s| num(k, s.trim()))
                        .collect::<Result<_, _>>()?;
                }
                "replay_capacity" => self.replay_capacity = num(k, v)?,
                "batch_size" => self.batch_size = num(k, v)?,
                "eps_start" => self.eps_start = num(k, v)?,
                "eps_end" => self.eps_end = num(k, v)?,
                "eps_decay_steps" => self.eps_decay_steps = num(k, v)?,
                "target_sync" => self.target_sync = num(k, v)?,
                "rollout" => self.rollout = num(k, v)?,
                "entropy_coef" => self.entropy_coef = num(k, v)?,
                "value_coef" => self.value_coef = num(k, v)?,
                "clip" => self.clip = num(k, v)?,
                "epochs" => self.epochs = num(k, v)?,
                _ => return Err(AgentError::InvalidHyperparameter(format!("unknown key `{k}`"))),
            }
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: &str| Err(AgentError::InvalidHyperparameter(m.to_string()));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must be in (0, 1]");
        }
        if !(self.clip > 0.0 && self.clip < 1.0) {
            return bad("clip must be in (0, 1)");
        }
        if self.entropy_coef < 0.0 || self.value_coef <= 0.0 {
            return bad("coefficients must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.eps_start) || !(0.0..=1.0).contains(&self.eps_end) || self.eps_end > self.eps_start {
            return bad("epsilon schedule must decrease within [0, 1]");
        }
        if self.replay_capacity == 0 || self.batch_size == 0 || self.rollout == 0 || self.epochs == 0 {
            return bad("buffer sizes and epochs must be positive");
        }
        if self.target_sync == 0 || self.hidden.contains(&0) {
            return bad("target_sync and hidden sizes must be positive");
        }
        Ok(())
    }

    /// Layer sizes for a network with the configured hidden layers.
    pub fn sizes(&self, input: usize, output: usize) -> Vec<usize> {
        let mut s = vec![input];
        s.extend_from_slice(&self.hidden);
        s.push(output);
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: i32,
    pub next_state: Vec<f64>,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub enum AgentPolicy {
    Random(RandomAgent),
    Dqn(DqnAgent),
    A2c(A2cAgent),
    Ppo(PpoAgent),
}

/// Builds an agent. DQN is only defined over discrete action spaces and the
/// other policies here only implement discrete heads.
pub fn new_agent(config: &AgentConfig, obs_dim: usize, space: ActionSpace, seed: u64) -> Result<AgentPolicy, AgentError> {
    config.validate()?;
    let actions = match space {
        ActionSpace::Discrete(n) if n >= 1 => n,
        ActionSpace::Discrete(_) => return Err(AgentError::InvalidHyperparameter("empty action space".into())),
        ActionSpace::Continuous { .. } if config.kind == PolicyKind::Dqn => return Err(AgentError::DiscreteOnly),
        ActionSpace::Continuous { .. } => return Err(AgentError::Unsupported("continuous action heads".into())),
    };
    if obs_dim == 0 {
        return Err(AgentError::InvalidHyperparameter("empty observation".into()));
    }
    Ok(match config.kind {
        PolicyKind::Random => AgentPolicy::Random(RandomAgent::new(actions, seed)),
        PolicyKind::Dqn => AgentPolicy::Dqn(DqnAgent::new(config, obs_dim, actions, seed)?),
        PolicyKind::A2c => AgentPolicy::A2c(A2cAgent::new(config, obs_dim, actions, seed)?),
        PolicyKind::Ppo => AgentPolicy::Ppo(PpoAgent::new(config, obs_dim, actions, seed)?),
    })
}

impl AgentPolicy {
    pub fn kind(&self) -> PolicyKind {
        match self {
            AgentPolicy::Random(_) => PolicyKind::Random,
            AgentPolicy::Dqn(_) => PolicyKind::Dqn,
            AgentPolicy::A2c(_) => PolicyKind::A2c,
            AgentPolicy::Ppo(_) => PolicyKind::Ppo,
        }
    }

    pub fn select_action(&mut self, obs: &[f64]) -> Result<usize, AgentError> {
        match self {
            AgentPolicy::Random(a) => Ok(a.select_action()),
            AgentPolicy::Dqn(a) => a.select_action(obs),
            AgentPolicy::A2c(a) => a.select_action(obs),
            AgentPolicy::Ppo(a) => a.select_action(obs),
        }
    }

    pub fn observe(&mut self, t: Transition) {
        match self {
            AgentPolicy::Random(_) => {}
            AgentPolicy::Dqn(a) => a.observe(t),
            AgentPolicy::A2c(a) => a.observe(t),
            AgentPolicy::Ppo(a) => a.observe(t),
        }
    }

    /// Whether [`update`](Self::update) has enough data.
    pub fn ready(&self) -> bool {
        match self {
            AgentPolicy::Random(_) => false,
            AgentPolicy::Dqn(a) => a.ready(),
            AgentPolicy::A2c(a) => a.ready(),
            AgentPolicy::Ppo(a) => a.ready(),
        }
    }

    pub fn update(&mut self) -> Result<BTreeMap<String, f64>, AgentError> {
        match self {
            AgentPolicy::Random(_) => Err(AgentError::InsufficientData { have: 0, need: 1 }),
            AgentPolicy::Dqn(a) => a.update(),
            AgentPolicy::A2c(a) => a.update(),
            AgentPolicy::Ppo(a) => a.update(),
        }
    }

    /// Networks in checkpoint order.
    pub fn networks(&self) -> Vec<&Mlp> {
        match self {
            AgentPolicy::Random(_) => vec![],
            AgentPolicy::Dqn(a) => vec![&a.q],
            AgentPolicy::A2c(a) => vec![&a.actor, &a.critic],
            AgentPolicy::Ppo(a) => vec![&a.actor, &a.critic],
        }
    }

    pub fn networks_mut(&mut self) -> Vec<&mut Mlp> {
        match self {
            AgentPolicy::Random(_) => vec![],
            AgentPolicy::Dqn(a) => vec![&mut a.q],
            AgentPolicy::A2c(a) => vec![&mut a.actor, &mut a.critic],
            AgentPolicy::Ppo(a) => vec![&mut a.actor, &mut a.critic],
        }
    }
}

pub(crate) fn sample_categorical(p: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, x) in p.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// `d(-H)/dlogits` for a softmax distribution, where `H = -sum p log p`.
pub(crate) fn neg_entropy_grad(p: &[f64]) -> (f64, Vec<f64>) {
    let h: f64 = -p.iter().filter(|x| **x > 0.0).map(|x| x * x.ln()).sum::<f64>();
    let g = p.iter().map(|&pi| if pi > 0.0 { pi * (pi.ln() + h) } else { 0.0 }).collect();
    (h, g)
}

#[cfg(test)]
mod tests;
