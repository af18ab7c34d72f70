//! `key = value` environment configuration files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use super::{EnvError, RewardScheme};
use crate::agents::PolicyKind;
use crate::sim::{CoverageType, Score};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObservationMode {
    /// The configured coverage fraction alone.
    #[default]
    Scalar,
    /// Coverage fraction, the four per-type fractions and a one-hot of the
    /// previous action.
    Augmented,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillPolicy {
    /// Inputs outside the action set are held at zero.
    #[default]
    Zero,
    /// Inputs outside the action set get fresh seeded random values each cycle.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub top_module: String,
    pub coverage_type: CoverageType,
    pub learning_policy: PolicyKind,
    pub ports: Vec<String>,
    pub reward_scheme: RewardScheme,
    pub max_steps: u64,
    pub seed: u64,
    pub target: Score,
    pub observation: ObservationMode,
    pub fill_inputs: FillPolicy,
    /// Episodes the agent trains on before the measured episode.
    pub train_episodes: u32,
    /// HDL source for designs outside the built-in corpus.
    pub source: Option<PathBuf>,
    /// `agent.*` hyperparameter overrides, keys without the prefix.
    pub agent: BTreeMap<String, String>,
}

impl EnvConfig {
    pub fn new(top_module: &str, coverage_type: CoverageType, ports: &[&str]) -> Self {
        Self {
            top_module: top_module.to_string(),
            coverage_type,
            learning_policy: PolicyKind::Random,
            ports: ports.iter().map(|p| p.to_string()).collect(),
            reward_scheme: RewardScheme::Optimistic,
            max_steps: 1000,
            seed: 0,
            target: Score::FULL,
            observation: ObservationMode::Scalar,
            fill_inputs: FillPolicy::Zero,
            train_episodes: 0,
            source: None,
            agent: BTreeMap::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, EnvError> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| EnvError::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let k = k.trim().to_string();
            if kv.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(EnvError::Config(format!("line {}: duplicate key `{k}`", n + 1)));
            }
        }
        let mut take = |k: &str| kv.remove(k);
        let required = |v: Option<String>, k: &str| v.ok_or_else(|| EnvError::Config(format!("missing key `{k}`")));
        fn parsed<T: FromStr>(v: String, k: &str) -> Result<T, EnvError>
        where
            T::Err: std::fmt::Display,
        {
            v.parse().map_err(|e| EnvError::Config(format!("`{k}`: {e}")))
        }

        let top_module = required(take("top_module"), "top_module")?;
        let coverage_type = parsed(required(take("coverage_type"), "coverage_type")?, "coverage_type")?;
        let learning_policy = parsed(required(take("learning_policy"), "learning_policy")?, "learning_policy")?;
        let ports = required(take("ports"), "ports")?
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(String::from)
            .collect();
        let reward_scheme = parsed(required(take("reward_scheme"), "reward_scheme")?, "reward_scheme")?;
        let mut cfg = EnvConfig {
            top_module,
            coverage_type,
            learning_policy,
            ports,
            reward_scheme,
            ..EnvConfig::new("", CoverageType::Code, &[])
        };
        if let Some(v) = take("max_steps") {
            cfg.max_steps = parsed(v, "max_steps")?;
        }
        if let Some(v) = take("seed") {
            cfg.seed = parsed(v, "seed")?;
        }
        if let Some(v) = take("target_percent") {
            cfg.target = Score::from_percent_str(&v)
                .filter(|s| s.covered > 0)
                .ok_or_else(|| EnvError::Config(format!("`target_percent`: `{v}` is not in (0,100]")))?;
        }
        if let Some(v) = take("observation") {
            cfg.observation = match v.as_str() {
                "scalar" => ObservationMode::Scalar,
                "augmented" => ObservationMode::Augmented,
                _ => return Err(EnvError::Config(format!("`observation`: unknown mode `{v}`"))),
            };
        }
        if let Some(v) = take("fill_inputs") {
            cfg.fill_inputs = match v.as_str() {
                "zero" => FillPolicy::Zero,
                "random" => FillPolicy::Random,
                _ => return Err(EnvError::Config(format!("`fill_inputs`: unknown policy `{v}`"))),
            };
        }
        if let Some(v) = take("train_episodes") {
            cfg.train_episodes = parsed(v, "train_episodes")?;
        }
        if let Some(v) = take("source") {
            cfg.source = Some(PathBuf::from(v));
        }
        for (k, v) in std::mem::take(&mut kv) {
            match k.strip_prefix("agent.") {
                Some(name) => {
                    cfg.agent.insert(name.to_string(), v);
                }
                None => return Err(EnvError::Config(format!("unknown key `{k}`"))),
            }
        }
        if cfg.max_steps == 0 {
            return Err(EnvError::Config("`max_steps` must be positive".into()));
        }
        Ok(cfg)
    }

    /// Renders the config in the file format, omitting defaulted extras.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "top_module = {}", self.top_module);
        let _ = writeln!(out, "coverage_type = {}", self.coverage_type);
        let _ = writeln!(out, "learning_policy = {}", self.learning_policy);
        let _ = writeln!(out, "ports = {}", self.ports.join(","));
        let _ = writeln!(out, "reward_scheme = {}", self.reward_scheme);
        let _ = writeln!(out, "max_steps = {}", self.max_steps);
        let _ = writeln!(out, "seed = {}", self.seed);
        if !self.target.is_full() {
            let _ = writeln!(out, "target_percent = {}", self.target.percent_string(6));
        }
        if self.observation == ObservationMode::Augmented {
            out.push_str("observation = augmented\n");
        }
        if self.fill_inputs == FillPolicy::Random {
            out.push_str("fill_inputs = random\n");
        }
        if self.train_episodes > 0 {
            let _ = writeln!(out, "train_episodes = {}", self.train_episodes);
        }
        if let Some(s) = &self.source {
            let _ = writeln!(out, "source = {}", s.display());
        }
        for (k, v) in &self.agent {
            let _ = writeln!(out, "agent.{k} = {v}");
        }
        out
    }
}
