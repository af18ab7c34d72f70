//! Episode driver, maximum-coverage probe and RL-versus-random comparison.

mod report;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::agents::{new_agent, ActionSpace, AgentConfig, AgentError, AgentPolicy, PolicyKind, Transition};
use crate::env::{make_env, Backend, Env, EnvConfig, EnvError, RewardScheme};
use crate::hdl::DesignIR;
use crate::sim::{CoverageType, Score};
pub use report::{maxcov_csv, median_cell, trajectory_csv, write_outputs, CompareReport};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

/// One episode's progress.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    /// `(step, score)` starting with the post-reset score at step 0.
    pub trajectory: Vec<(u64, Score)>,
    /// Block, toggle, FSM and expression scores per trajectory point, when
    /// the backend reports them.
    pub breakdown: Vec<[Score; 4]>,
    pub actions: Vec<usize>,
    pub rewards: Vec<i32>,
    pub updates: usize,
}

impl Episode {
    pub fn steps(&self) -> u64 {
        self.actions.len() as u64
    }

    pub fn final_score(&self) -> Score {
        self.trajectory.last().map(|p| p.1).unwrap_or(Score::new(0, 1))
    }

    /// First step whose score reaches `target`.
    pub fn first_reaching(&self, target: Score) -> Option<u64> {
        self.trajectory.iter().find(|(_, s)| *s >= target).map(|(i, _)| *i)
    }
}

/// Runs one episode: reset, then act/step/observe until done. With `learn`
/// the agent updates whenever it has enough data.
pub fn run_episode<B: Backend>(env: &mut Env<B>, agent: &mut AgentPolicy, learn: bool) -> Result<Episode, ExperimentError> {
    let mut obs = env.reset()?;
    let mut ep = Episode {
        trajectory: vec![(0, env.score())],
        breakdown: Vec::new(),
        actions: Vec::new(),
        rewards: Vec::new(),
        updates: 0,
    };
    let push_breakdown = |env: &Env<B>, ep: &mut Episode| {
        if let Some(b) = env.last_sample().and_then(|s| s.breakdown) {
            ep.breakdown.push(b);
        }
    };
    push_breakdown(env, &mut ep);
    while !env.is_done() {
        let state = obs.features();
        let action = agent.select_action(&state)?;
        let r = env.step(action)?;
        let next = r.observation.features();
        agent.observe(Transition {
            state,
            action,
            reward: r.reward,
            next_state: next,
            done: r.done,
        });
        if learn && agent.ready() {
            agent.update()?;
            ep.updates += 1;
        }
        ep.actions.push(action);
        ep.rewards.push(r.reward);
        ep.trajectory.push((env.steps(), r.info.score));
        push_breakdown(env, &mut ep);
        obs = r.observation;
    }
    Ok(ep)
}

/// Seed for the agent's own generator, decorrelated from the environment's.
pub fn agent_seed(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Builds the agent a config asks for, sized to its environment.
pub fn build_agent<B: Backend>(env: &Env<B>, config: &EnvConfig) -> Result<AgentPolicy, ExperimentError> {
    let acfg = AgentConfig::new(config.learning_policy).with_overrides(&config.agent)?;
    Ok(new_agent(
        &acfg,
        env.obs_dim(),
        ActionSpace::Discrete(env.action_count()),
        agent_seed(config.seed),
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeMethod {
    /// Every action in turn, repeated.
    Exhaustive,
    /// Seeded uniform random actions.
    Random,
    /// Best of an exhaustive sweep and random probes.
    ExhaustiveAndRandom,
}

impl ProbeMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProbeMethod::Exhaustive => "exhaustive",
            ProbeMethod::Random => "random",
            ProbeMethod::ExhaustiveAndRandom => "exhaustive+random",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxCoverageRecord {
    pub design: String,
    pub coverage_type: CoverageType,
    pub max: Score,
    pub budget: u64,
    pub method: ProbeMethod,
}

/// Largest action space swept exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 4096;

/// Empirical maximum coverage. Action spaces up to [`EXHAUSTIVE_LIMIT`] are
/// swept in index order for `budget` cycles; in addition `seeds` random
/// probes of `budget` cycles each run, and the best score seen wins.
pub fn find_max_coverage(ir: &DesignIR, config: &EnvConfig, budget: u64, seeds: u64) -> Result<MaxCoverageRecord, ExperimentError> {
    let mut cfg = config.clone();
    cfg.target = Score::FULL;
    cfg.max_steps = budget.max(1);
    let mut env = make_env(cfg.clone(), ir.clone())?;
    let n = env.action_count();
    let exhaustive = n <= EXHAUSTIVE_LIMIT;
    let mut best = env.reset()?;
    let mut best_score = env.score();
    if budget == 0 {
        let _ = &mut best;
        return Ok(MaxCoverageRecord {
            design: ir.name.clone(),
            coverage_type: cfg.coverage_type,
            max: best_score,
            budget,
            method: if exhaustive { ProbeMethod::Exhaustive } else { ProbeMethod::Random },
        });
    }
    if exhaustive {
        let mut i = 0;
        while !env.is_done() {
            env.step(i % n)?;
            i += 1;
        }
        best_score = best_score.max(env.score());
    }
    let probes: Vec<Score> = (0..seeds)
        .into_par_iter()
        .map(|s| -> Result<Score, ExperimentError> {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(s);
            let mut env = make_env(c, ir.clone())?;
            let mut rng = ChaCha8Rng::seed_from_u64(agent_seed(cfg.seed.wrapping_add(s)));
            env.reset()?;
            while !env.is_done() {
                env.step(rng.gen_range(0..n))?;
            }
            Ok(env.score())
        })
        .collect::<Result<_, _>>()?;
    for p in probes {
        best_score = best_score.max(p);
    }
    let method = match (exhaustive, seeds > 0) {
        (true, true) => ProbeMethod::ExhaustiveAndRandom,
        (true, false) => ProbeMethod::Exhaustive,
        _ => ProbeMethod::Random,
    };
    Ok(MaxCoverageRecord {
        design: ir.name.clone(),
        coverage_type: cfg.coverage_type,
        max: best_score,
        budget,
        method,
    })
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub design: String,
    pub policy: PolicyKind,
    /// `None` for the random baseline, which ignores rewards.
    pub scheme: Option<RewardScheme>,
    pub seed: u64,
    /// First evaluation step at the known maximum; `None` when censored.
    pub stimuli_to_max: Option<u64>,
    pub max_steps: u64,
    pub episode: Episode,
    /// Steps spent in training episodes before the measured one.
    pub training_steps: u64,
    pub wall_time: Duration,
}

impl RunRecord {
    pub fn scheme_label(&self) -> &'static str {
        self.scheme.map_or("none", |s| s.as_str())
    }
}

/// Runs `config.train_episodes` training episodes, then the measured
/// episode, which stops at the known maximum or the step budget. The agent
/// keeps learning online during the measured episode.
pub fn run_one(ir: &DesignIR, config: &EnvConfig, max: Score) -> Result<RunRecord, ExperimentError> {
    let start = Instant::now();
    let mut cfg = config.clone();
    cfg.target = cfg.target.min(max);
    let mut env = make_env(cfg.clone(), ir.clone())?;
    let mut agent = build_agent(&env, &cfg)?;
    let learn = cfg.learning_policy != PolicyKind::Random;
    let mut training_steps = 0;
    if learn {
        for _ in 0..cfg.train_episodes {
            training_steps += run_episode(&mut env, &mut agent, true)?.steps();
        }
    }
    let episode = run_episode(&mut env, &mut agent, learn)?;
    Ok(RunRecord {
        design: ir.name.clone(),
        policy: cfg.learning_policy,
        scheme: learn.then_some(cfg.reward_scheme),
        seed: cfg.seed,
        stimuli_to_max: episode.first_reaching(max),
        max_steps: cfg.max_steps,
        episode,
        training_steps,
        wall_time: start.elapsed(),
    })
}

/// One design's inputs to a comparison.
#[derive(Debug, Clone)]
pub struct CompareDesign {
    pub ir: DesignIR,
    pub config: EnvConfig,
    pub max: MaxCoverageRecord,
}

/// Runs the random baseline and every `(policy, scheme)` pair over seeds
/// `0..n_seeds` (offset by each config's seed), in parallel. Records come
/// back sorted by design, policy, scheme and seed.
pub fn compare(
    designs: &[CompareDesign],
    combos: &[(PolicyKind, RewardScheme)],
    n_seeds: u64,
) -> Result<CompareReport, ExperimentError> {
    let mut jobs = Vec::new();
    for (di, d) in designs.iter().enumerate() {
        for s in 0..n_seeds {
            jobs.push((di, PolicyKind::Random, d.config.reward_scheme, s));
            for &(p, r) in combos {
                if p != PolicyKind::Random {
                    jobs.push((di, p, r, s));
                }
            }
        }
    }
    let mut records: Vec<(usize, RunRecord)> = jobs
        .into_par_iter()
        .map(|(di, p, r, s)| {
            let d = &designs[di];
            let mut cfg = d.config.clone();
            cfg.learning_policy = p;
            cfg.reward_scheme = r;
            cfg.seed = d.config.seed.wrapping_add(s);
            run_one(&d.ir, &cfg, d.max.max).map(|rec| (di, rec))
        })
        .collect::<Result<_, _>>()?;
    records.sort_by(|(da, a), (db, b)| {
        (da, a.policy, a.scheme, a.seed).cmp(&(db, b.policy, b.scheme, b.seed))
    });
    let combos = combos.iter().copied().filter(|(p, _)| *p != PolicyKind::Random).collect();
    Ok(CompareReport {
        designs: designs.to_vec(),
        combos,
        records: records.into_iter().map(|(_, r)| r).collect(),
    })
}

#[cfg(test)]
mod tests;
