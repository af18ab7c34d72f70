//! CSV rendering of comparison results.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{CompareDesign, MaxCoverageRecord, RunRecord};
use crate::agents::PolicyKind;
use crate::env::RewardScheme;

/// Everything a comparison produced, in deterministic order.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub designs: Vec<CompareDesign>,
    /// Learning `(policy, scheme)` columns, random excluded.
    pub combos: Vec<(PolicyKind, RewardScheme)>,
    pub records: Vec<RunRecord>,
}

/// Median of `stimuli_to_max` values with censored runs ordered last.
/// A median that lands on a censored run renders as `>max_steps`.
pub fn median_cell(values: &[Option<u64>], max_steps: u64) -> String {
    if values.is_empty() {
        return String::new();
    }
    let mut v: Vec<u64> = values.iter().map(|x| x.unwrap_or(u64::MAX)).collect();
    v.sort_unstable();
    let n = v.len();
    let (a, b) = if n % 2 == 1 { (v[n / 2], v[n / 2]) } else { (v[n / 2 - 1], v[n / 2]) };
    if a == u64::MAX || b == u64::MAX {
        return format!(">{max_steps}");
    }
    let sum = a as u128 + b as u128;
    if sum.is_multiple_of(2) {
        (sum / 2).to_string()
    } else {
        format!("{}.5", sum / 2)
    }
}

impl CompareReport {
    pub fn records_for<'a>(
        &'a self,
        design: &'a str,
        policy: PolicyKind,
        scheme: Option<RewardScheme>,
    ) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.records
            .iter()
            .filter(move |r| r.design == design && r.policy == policy && r.scheme == scheme)
    }

    fn cell(&self, design: &str, policy: PolicyKind, scheme: Option<RewardScheme>) -> String {
        let recs: Vec<&RunRecord> = self.records_for(design, policy, scheme).collect();
        let budget = recs.iter().map(|r| r.max_steps).max().unwrap_or(0);
        let vals: Vec<Option<u64>> = recs.iter().map(|r| r.stimuli_to_max).collect();
        median_cell(&vals, budget)
    }

    pub fn header(&self) -> String {
        let mut h = String::from("design,max_coverage,random");
        for (p, s) in &self.combos {
            let _ = write!(h, ",{p}_{s}");
        }
        h
    }

    /// One row per design with median stimuli to the known maximum.
    pub fn summary_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for d in &self.designs {
            let name = &d.ir.name;
            let _ = write!(out, "{name},{},{}", d.max.max.percent_string(2), self.cell(name, PolicyKind::Random, None));
            for &(p, s) in &self.combos {
                let _ = write!(out, ",{}", self.cell(name, p, Some(s)));
            }
            out.push('\n');
        }
        out
    }

    pub fn maxcov_csv(&self) -> String {
        maxcov_csv(self.designs.iter().map(|d| &d.max))
    }

    /// `(file name, contents)` for every run's trajectory.
    pub fn trajectory_csvs(&self) -> Vec<(String, String)> {
        self.records
            .iter()
            .map(|r| {
                let name = format!("trajectory_{}_{}_{}_{}.csv", r.design, r.policy, r.scheme_label(), r.seed);
                (name, trajectory_csv(r))
            })
            .collect()
    }
}

pub fn trajectory_csv(r: &RunRecord) -> String {
    let mut out = String::from("step,score\n");
    for (step, s) in &r.episode.trajectory {
        let _ = writeln!(out, "{step},{}", s.percent_string(6));
    }
    out
}

pub fn maxcov_csv<'a>(records: impl IntoIterator<Item = &'a MaxCoverageRecord>) -> String {
    let mut out = String::from("design,coverage_type,max_percent,budget,method\n");
    for m in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            m.design,
            m.coverage_type,
            m.max.percent_string(6),
            m.budget,
            m.method.as_str()
        );
    }
    out
}

/// Writes `summary.csv`, `maxcov.csv` and the trajectories into `dir`.
pub fn write_outputs(report: &CompareReport, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = vec![
        ("summary.csv".to_string(), report.summary_csv()),
        ("maxcov.csv".to_string(), report.maxcov_csv()),
    ];
    files.extend(report.trajectory_csvs());
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
