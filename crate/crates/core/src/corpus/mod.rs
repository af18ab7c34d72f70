//! Built-in designs with golden port specs, structural counts and
//! recommended environment configs.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{EnvConfig, EnvError};
use crate::experiment::{find_max_coverage, CompareDesign, ExperimentError, MaxCoverageRecord, ProbeMethod};
use crate::hdl::{detect_fsms, emit_port_spec, extract_ports, parse_design, DesignIR, HdlError, PortFormat, PortSpecSet};
use crate::sim::{CoverageType, Score, SimError, SimInstance};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown corpus design `{0}`")]
    UnknownDesign(String),
    #[error("{design}: {file} does not match its source: {detail}")]
    Integrity { design: String, file: String, detail: String },
    #[error("source defines `{found}`, config names `{expected}`")]
    TopMismatch { found: String, expected: String },
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Hdl(#[from] HdlError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

/// One shipped design and its golden files, embedded at build time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub source: &'static str,
    pub ports_xml: &'static str,
    pub golden_json: &'static str,
    pub env_cfg: &'static str,
}

/// Structural counts plus the documented maximum-coverage probe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Golden {
    pub design: String,
    pub blocks: usize,
    pub toggle_items: usize,
    pub fsm_states: usize,
    pub fsm_transitions: usize,
    pub condition_sites: usize,
    pub max_coverage: GoldenMax,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenMax {
    pub coverage_type: String,
    /// Six-decimal percent string.
    pub percent: String,
    pub covered: u64,
    pub total: u64,
    pub budget: u64,
    pub seeds: u64,
    pub method: String,
}

macro_rules! entry {
    ($name:literal) => {
        CorpusEntry {
            name: $name,
            source: include_str!(concat!("../../corpus/", $name, ".v")),
            ports_xml: include_str!(concat!("../../corpus/", $name, ".ports.xml")),
            golden_json: include_str!(concat!("../../corpus/", $name, ".golden.json")),
            env_cfg: include_str!(concat!("../../corpus/", $name, ".env.cfg")),
        }
    };
}

pub const ENTRIES: [CorpusEntry; 4] = [entry!("alu"), entry!("tap_fsm"), entry!("fifo_sync"), entry!("fir4")];

/// Every shipped design, integrity-checked against its goldens.
pub fn load_corpus() -> Result<Vec<CorpusEntry>, CorpusError> {
    ENTRIES
        .iter()
        .map(|e| {
            e.check_integrity()?;
            Ok(*e)
        })
        .collect()
}

pub fn entry(name: &str) -> Result<CorpusEntry, CorpusError> {
    ENTRIES
        .iter()
        .find(|e| e.name == name)
        .copied()
        .ok_or_else(|| CorpusError::UnknownDesign(name.to_string()))
}

impl CorpusEntry {
    pub fn ir(&self) -> Result<DesignIR, CorpusError> {
        Ok(parse_design(self.source)?)
    }

    pub fn ports(&self) -> Result<PortSpecSet, CorpusError> {
        Ok(extract_ports(&self.ir()?))
    }

    pub fn env_config(&self) -> Result<EnvConfig, CorpusError> {
        Ok(EnvConfig::parse(self.env_cfg)?)
    }

    pub fn golden(&self) -> Result<Golden, CorpusError> {
        serde_json::from_str(self.golden_json).map_err(|e| self.integrity("golden.json", e.to_string()))
    }

    /// The documented maximum as a probe record.
    pub fn max_record(&self) -> Result<MaxCoverageRecord, CorpusError> {
        let g = self.golden()?;
        let bad = |d: &str| self.integrity("golden.json", d.to_string());
        let method = match g.max_coverage.method.as_str() {
            "exhaustive" => ProbeMethod::Exhaustive,
            "random" => ProbeMethod::Random,
            "exhaustive+random" => ProbeMethod::ExhaustiveAndRandom,
            _ => return Err(bad("unknown probe method")),
        };
        Ok(MaxCoverageRecord {
            design: g.design,
            coverage_type: g.max_coverage.coverage_type.parse().map_err(|e: String| bad(&e))?,
            max: exact_max(&g.max_coverage).ok_or_else(|| bad("max coverage disagrees with its percent"))?,
            budget: g.max_coverage.budget,
            method,
        })
    }

    /// Reruns the documented probe.
    pub fn probe_max(&self) -> Result<MaxCoverageRecord, CorpusError> {
        let g = self.golden()?;
        let mut cfg = self.env_config()?;
        cfg.coverage_type = g.max_coverage.coverage_type.parse().map_err(|e: String| self.integrity("golden.json", e))?;
        Ok(find_max_coverage(&self.ir()?, &cfg, g.max_coverage.budget, g.max_coverage.seeds)?)
    }

    /// Regenerates the port spec and structural counts from source and
    /// compares them with the shipped goldens.
    pub fn check_integrity(&self) -> Result<(), CorpusError> {
        let ir = self.ir()?;
        let xml = emit_port_spec(&extract_ports(&ir), PortFormat::Xml);
        if xml != self.ports_xml {
            return Err(self.integrity("ports.xml", first_difference(&xml, self.ports_xml)));
        }
        let shipped = self.golden()?;
        let fresh = structural_golden(&ir, shipped.max_coverage.clone())?;
        if fresh != shipped {
            return Err(self.integrity("golden.json", format!("expected {fresh:?}")));
        }
        let cfg = self.env_config()?;
        if cfg.top_module != self.name {
            return Err(self.integrity("env.cfg", format!("top_module `{}`", cfg.top_module)));
        }
        crate::env::make_env(cfg, ir)?;
        Ok(())
    }

    fn integrity(&self, file: &str, detail: String) -> CorpusError {
        CorpusError::Integrity {
            design: self.name.to_string(),
            file: format!("{}.{file}", self.name),
            detail,
        }
    }
}

/// The design a config names: its `source` file (relative paths resolve
/// against `base`), or else the corpus entry called `top_module`.
pub fn load_design(config: &EnvConfig, base: &Path) -> Result<DesignIR, CorpusError> {
    let ir = match &config.source {
        Some(src) => {
            let path = base.join(src);
            let text = std::fs::read_to_string(&path).map_err(|source| CorpusError::Io {
                path: path.display().to_string(),
                source,
            })?;
            parse_design(&text)?
        }
        None => entry(&config.top_module)?.ir()?,
    };
    if ir.name != config.top_module {
        return Err(CorpusError::TopMismatch {
            found: ir.name,
            expected: config.top_module.clone(),
        });
    }
    Ok(ir)
}

/// A comparison input. Corpus designs reuse their documented maximum when
/// the coverage type matches; anything else is probed with `budget` cycles
/// per probe over `seeds` probes.
pub fn compare_design(config: &EnvConfig, base: &Path, budget: u64, seeds: u64) -> Result<CompareDesign, CorpusError> {
    let ir = load_design(config, base)?;
    let documented = match (&config.source, entry(&config.top_module)) {
        (None, Ok(e)) => Some(e.max_record()?).filter(|m| m.coverage_type == config.coverage_type),
        _ => None,
    };
    let max = match documented {
        Some(m) => m,
        None => find_max_coverage(&ir, config, budget, seeds)?,
    };
    Ok(CompareDesign { ir, config: config.clone(), max })
}

/// Structural counts of a design, with a given maximum-coverage record.
pub fn structural_golden(ir: &DesignIR, max_coverage: GoldenMax) -> Result<Golden, CorpusError> {
    let sim = SimInstance::elaborate(ir.clone())?;
    let fsms = detect_fsms(ir);
    Ok(Golden {
        design: ir.name.clone(),
        blocks: ir.blocks.len(),
        toggle_items: 2 * sim.toggle_bits(),
        fsm_states: fsms.iter().map(|f| f.states.len()).sum(),
        fsm_transitions: fsms.iter().map(|f| f.transitions.len()).sum(),
        condition_sites: ir.cond_sites.len(),
        max_coverage,
    })
}

/// Full golden JSON for a design: structural counts plus a fresh probe.
pub fn render_golden(ir: &DesignIR, config: &EnvConfig, coverage_type: CoverageType, budget: u64, seeds: u64) -> Result<String, CorpusError> {
    let mut cfg = config.clone();
    cfg.coverage_type = coverage_type;
    let m = find_max_coverage(ir, &cfg, budget, seeds)?;
    let g = structural_golden(
        ir,
        GoldenMax {
            coverage_type: coverage_type.to_string(),
            percent: m.max.percent_string(6),
            covered: m.max.covered,
            total: m.max.total,
            budget,
            seeds,
            method: m.method.as_str().to_string(),
        },
    )?;
    Ok(serde_json::to_string_pretty(&g).expect("plain data serializes") + "\n")
}

fn exact_max(m: &GoldenMax) -> Option<Score> {
    if m.total == 0 || m.covered > m.total {
        return None;
    }
    let s = Score::new(m.covered, m.total);
    (s.percent_string(6) == m.percent).then_some(s)
}

fn first_difference(a: &str, b: &str) -> String {
    for (i, (x, y)) in a.lines().zip(b.lines()).enumerate() {
        if x != y {
            return format!("line {}: expected `{x}`, found `{y}`", i + 1);
        }
    }
    format!("expected {} lines, found {}", a.lines().count(), b.lines().count())
}

#[cfg(test)]
mod tests;
