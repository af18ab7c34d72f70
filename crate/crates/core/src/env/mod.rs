//! Gym-style episode loop over a coverage backend.

pub mod action;
pub mod config;
pub mod reward;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bits::{mask, BitVector};
use crate::hdl::ir::Direction;
use crate::hdl::{extract_ports, ports::reset_active_high, DesignIR, PortRole, PortSpec, PortSpecSet};
use crate::sim::{CoverageSnapshot, CoverageType, Score, SimError, SimInstance};
pub use action::{decode_action, encode_action, ActionCodec, MAX_ACTION_BITS};
pub use config::{EnvConfig, FillPolicy, ObservationMode};
pub use reward::{compute_reward, RewardScheme};

/// Largest action space the augmented observation one-hot supports.
pub const MAX_AUGMENTED_ACTIONS: usize = 1024;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("unknown port `{0}`")]
    UnknownPort(String),
    #[error("port `{0}` is not an input")]
    NotAnInput(String),
    #[error("clock port `{0}` cannot be an action port")]
    ClockAsActionPort(String),
    #[error("action space of 2^{bits} exceeds the cap of 2^{cap_bits}")]
    ActionSpaceTooLarge { bits: u32, cap_bits: u32 },
    #[error("action {index} out of range for {size} actions")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("episode finished; call reset")]
    EpisodeFinished,
    #[error("environment has not been reset")]
    NotReset,
    #[error("design `{got}` does not match configured top module `{expected}`")]
    DesignMismatch { expected: String, got: String },
    #[error("augmented observations are unavailable: {0}")]
    Observation(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("backend: {0}")]
    Backend(String),
}

/// Coverage reported by a backend after one cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub cycle: u64,
    /// Score of the configured coverage type.
    pub score: Score,
    /// Block, toggle, FSM and expression scores, when the backend has them.
    pub breakdown: Option<[Score; 4]>,
    pub newly_covered: usize,
}

/// Something that can be driven one cycle at a time and report coverage.
pub trait Backend {
    /// Full port set of the design behind this backend.
    fn port_spec(&self) -> &PortSpecSet;

    /// Inputs this backend expects each cycle, in order.
    fn driven_inputs(&self) -> &[PortSpec];

    fn reset_active_high(&self) -> bool {
        true
    }

    fn has_breakdown(&self) -> bool;

    /// Restarts from power-on and runs the reset cycle with `inputs`.
    fn reset(&mut self, inputs: &[u64]) -> Result<Sample, EnvError>;

    /// Runs one cycle. `action` carries the decoded action ports for
    /// backends that only forward those.
    fn apply(&mut self, inputs: &[u64], action: &[(String, BitVector)]) -> Result<Sample, EnvError>;
}

/// In-process simulation backend.
#[derive(Debug, Clone)]
pub struct SimBackend {
    pristine: SimInstance,
    sim: SimInstance,
    ports: PortSpecSet,
    inputs: Vec<PortSpec>,
    coverage_type: CoverageType,
    reset_high: bool,
}

impl SimBackend {
    pub fn new(ir: DesignIR, coverage_type: CoverageType) -> Result<Self, EnvError> {
        let ports = extract_ports(&ir);
        let reset_high = ports.reset().is_none_or(|r| reset_active_high(&ir, &r.name));
        let sim = SimInstance::elaborate(ir)?;
        let inputs = sim
            .input_ports()
            .iter()
            .map(|id| {
                let name = &sim.ir().signal(*id).name;
                ports.get(name).cloned().expect("input is a port")
            })
            .collect();
        Ok(Self {
            pristine: sim.clone(),
            sim,
            ports,
            inputs,
            coverage_type,
            reset_high,
        })
    }

    pub fn sim(&self) -> &SimInstance {
        &self.sim
    }

    fn sample(&self, snap: &CoverageSnapshot) -> Sample {
        Sample {
            cycle: snap.cycle,
            score: snap.score(self.coverage_type),
            breakdown: Some([snap.block, snap.toggle, snap.fsm, snap.expr]),
            newly_covered: snap.newly_covered(self.coverage_type),
        }
    }
}

impl Backend for SimBackend {
    fn port_spec(&self) -> &PortSpecSet {
        &self.ports
    }

    fn driven_inputs(&self) -> &[PortSpec] {
        &self.inputs
    }

    fn reset_active_high(&self) -> bool {
        self.reset_high
    }

    fn has_breakdown(&self) -> bool {
        true
    }

    fn reset(&mut self, inputs: &[u64]) -> Result<Sample, EnvError> {
        self.sim = self.pristine.clone();
        let snap = self.sim.step_values(inputs);
        Ok(self.sample(&snap))
    }

    fn apply(&mut self, inputs: &[u64], _: &[(String, BitVector)]) -> Result<Sample, EnvError> {
        let snap = self.sim.step_values(inputs);
        Ok(self.sample(&snap))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Configured coverage as a fraction in [0, 1].
    pub coverage: f64,
    /// Per-type fractions then the previous-action one-hot.
    pub augmented: Option<Vec<f64>>,
}

impl Observation {
    /// Flat feature vector for agents.
    pub fn features(&self) -> Vec<f64> {
        let mut v = vec![self.coverage];
        if let Some(a) = &self.augmented {
            v.extend_from_slice(a);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub cycle: u64,
    pub score: Score,
    pub newly_covered: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: i32,
    pub done: bool,
    pub info: StepInfo,
}

pub struct Env<B: Backend> {
    config: EnvConfig,
    backend: B,
    codec: ActionCodec,
    /// Position of each action port in the backend's input vector.
    action_slots: Vec<usize>,
    reset_slot: Option<usize>,
    /// Slots filled by the fill policy.
    fill_slots: Vec<(usize, u32)>,
    rng: ChaCha8Rng,
    inputs: Vec<u64>,
    score: Score,
    steps: u64,
    done: bool,
    started: bool,
    last_action: Option<usize>,
    last: Option<Sample>,
}

impl<B: Backend> Env<B> {
    pub fn new(config: EnvConfig, backend: B) -> Result<Self, EnvError> {
        let spec = backend.port_spec();
        if spec.design_name != config.top_module {
            return Err(EnvError::DesignMismatch {
                expected: config.top_module.clone(),
                got: spec.design_name.clone(),
            });
        }
        let mut action_specs = Vec::new();
        for name in &config.ports {
            let p = spec.get(name).ok_or_else(|| EnvError::UnknownPort(name.clone()))?;
            if p.role == PortRole::Clock {
                return Err(EnvError::ClockAsActionPort(name.clone()));
            }
            if p.direction != Direction::Input {
                return Err(EnvError::NotAnInput(name.clone()));
            }
            action_specs.push(p.clone());
        }
        let codec = ActionCodec::from_specs(&action_specs)?;
        if config.observation == ObservationMode::Augmented {
            if !backend.has_breakdown() {
                return Err(EnvError::Observation("backend reports a single coverage score".into()));
            }
            if codec.size() > MAX_AUGMENTED_ACTIONS {
                return Err(EnvError::Observation(format!(
                    "{} actions exceed the one-hot limit of {MAX_AUGMENTED_ACTIONS}",
                    codec.size()
                )));
            }
        }
        let driven = backend.driven_inputs();
        let slot_of = |name: &str| driven.iter().position(|p| p.name == name);
        let mut action_slots = Vec::new();
        for p in &action_specs {
            action_slots.push(slot_of(&p.name).ok_or_else(|| EnvError::UnknownPort(p.name.clone()))?);
        }
        let reset_slot = spec.reset().and_then(|r| slot_of(&r.name));
        let fill_slots = driven
            .iter()
            .enumerate()
            .filter(|(i, _)| !action_slots.contains(i) && Some(*i) != reset_slot)
            .map(|(i, p)| (i, p.width))
            .collect();
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            inputs: vec![0; driven.len()],
            config,
            backend,
            codec,
            action_slots,
            reset_slot,
            fill_slots,
            score: Score::new(0, 1),
            steps: 0,
            done: false,
            started: false,
            last_action: None,
            last: None,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn backend_mut(&mut self) -> &mut B {
        &mut self.backend
    }

    pub fn into_backend(self) -> B {
        self.backend
    }

    pub fn codec(&self) -> &ActionCodec {
        &self.codec
    }

    pub fn action_count(&self) -> usize {
        self.codec.size()
    }

    pub fn obs_dim(&self) -> usize {
        match self.config.observation {
            ObservationMode::Scalar => 1,
            ObservationMode::Augmented => 1 + 4 + self.codec.size(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn score(&self) -> Score {
        self.score
    }

    pub fn last_sample(&self) -> Option<&Sample> {
        self.last.as_ref()
    }

    /// Power-on reset: one cycle with the reset port asserted and every
    /// other input zero. Not counted as a step.
    pub fn reset(&mut self) -> Result<Observation, EnvError> {
        self.inputs.iter_mut().for_each(|v| *v = 0);
        let high = self.backend.reset_active_high();
        if let Some(r) = self.reset_slot {
            self.inputs[r] = high as u64;
        }
        let sample = self.backend.reset(&self.inputs)?;
        if let Some(r) = self.reset_slot {
            self.inputs[r] = (!high) as u64;
        }
        self.steps = 0;
        self.started = true;
        self.last_action = None;
        self.score = sample.score;
        self.done = self.score >= self.config.target;
        self.last = Some(sample);
        Ok(self.observation())
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.done {
            return Err(EnvError::EpisodeFinished);
        }
        let values = self.codec.split(action)?;
        for (&slot, v) in self.action_slots.iter().zip(&values) {
            self.inputs[slot] = *v;
        }
        if self.config.fill_inputs == FillPolicy::Random {
            for &(slot, w) in &self.fill_slots {
                self.inputs[slot] = self.rng.gen::<u64>() & mask(w);
            }
        }
        let decoded = self.codec.decode(action)?;
        let sample = self.backend.apply(&self.inputs, &decoded)?;
        let reward = compute_reward(self.score, sample.score, self.config.reward_scheme);
        self.score = sample.score;
        self.steps += 1;
        self.done = self.score >= self.config.target || self.steps >= self.config.max_steps;
        self.last_action = Some(action);
        let info = StepInfo {
            cycle: sample.cycle,
            score: sample.score,
            newly_covered: sample.newly_covered,
        };
        self.last = Some(sample);
        Ok(StepResult {
            observation: self.observation(),
            reward,
            done: self.done,
            info,
        })
    }

    fn observation(&self) -> Observation {
        let augmented = match self.config.observation {
            ObservationMode::Scalar => None,
            ObservationMode::Augmented => {
                let mut v: Vec<f64> = self
                    .last
                    .as_ref()
                    .and_then(|s| s.breakdown)
                    .map(|b| b.iter().map(Score::fraction).collect())
                    .unwrap_or_else(|| vec![0.0; 4]);
                let mut one_hot = vec![0.0; self.codec.size()];
                if let Some(a) = self.last_action {
                    one_hot[a] = 1.0;
                }
                v.extend(one_hot);
                Some(v)
            }
        };
        Observation {
            coverage: self.score.fraction(),
            augmented,
        }
    }
}

/// Convenience constructor for the in-process backend.
pub fn make_env(config: EnvConfig, ir: DesignIR) -> Result<Env<SimBackend>, EnvError> {
    let backend = SimBackend::new(ir, config.coverage_type)?;
    Env::new(config, backend)
}

#[cfg(test)]
mod tests;
