//! Per-cycle value traces and the coverage dump format.

use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

use super::coverage::CoverageSnapshot;
use crate::bits::BitVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Inputs applied and combinational logic settled, before the edge.
    Pre,
    /// After non-blocking commits and re-settling.
    Post,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Pre => "pre",
            Phase::Post => "post",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub cycle: u64,
    pub phase: Phase,
    pub values: Vec<u64>,
}

/// Every storage slot's value at each phase of each cycle. Row 0 is the
/// post-elaboration state (`cycle 0, post`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueTrace {
    /// Slot names; memory words are named `mem[i]`.
    pub slots: Vec<String>,
    pub widths: Vec<u32>,
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("line {0}: {1}")]
    Malformed(usize, String),
}

impl ValueTrace {
    pub fn new(slots: Vec<String>, widths: Vec<u32>) -> Self {
        Self {
            slots,
            widths,
            rows: Vec::new(),
        }
    }

    pub fn post_rows(&self) -> impl Iterator<Item = &TraceRow> {
        self.rows.iter().filter(|r| r.phase == Phase::Post)
    }

    pub fn pre_row(&self, cycle: u64) -> Option<&TraceRow> {
        self.rows.iter().find(|r| r.cycle == cycle && r.phase == Phase::Pre)
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.slots.iter().position(|s| s == name)
    }

    /// CSV with header `cycle,phase,signal,value`; values are binary,
    /// most significant bit first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cycle,phase,signal,value\n");
        for r in &self.rows {
            for (i, v) in r.values.iter().enumerate() {
                let bits = format!("{:0w$b}", v, w = self.widths[i] as usize);
                let _ = writeln!(out, "{},{},{},{}", r.cycle, r.phase.as_str(), self.slots[i], bits);
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, TraceError> {
        let mut trace = ValueTrace::new(Vec::new(), Vec::new());
        let mut current: Option<TraceRow> = None;
        let mut first_row_done = false;
        for (n, line) in text.lines().enumerate().skip(1) {
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| TraceError::Malformed(n + 1, m.to_string());
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad("expected 4 fields"));
            }
            let cycle: u64 = f[0].parse().map_err(|_| bad("bad cycle"))?;
            let phase = match f[1] {
                "pre" => Phase::Pre,
                "post" => Phase::Post,
                _ => return Err(bad("bad phase")),
            };
            let value: BitVector = f[3].parse().map_err(|_| bad("bad value"))?;
            let starts_row = current.as_ref().is_none_or(|r| r.cycle != cycle || r.phase != phase);
            if starts_row {
                if let Some(r) = current.take() {
                    first_row_done = true;
                    trace.rows.push(r);
                }
                current = Some(TraceRow {
                    cycle,
                    phase,
                    values: Vec::new(),
                });
            }
            let row = current.as_mut().expect("row started");
            if !first_row_done {
                trace.slots.push(f[2].to_string());
                trace.widths.push(value.width());
            } else if trace.slots.get(row.values.len()).map(String::as_str) != Some(f[2]) {
                return Err(bad("signal order differs from first row"));
            }
            row.values.push(value.value());
        }
        if let Some(r) = current {
            trace.rows.push(r);
        }
        if trace.rows.iter().any(|r| r.values.len() != trace.slots.len()) {
            return Err(TraceError::Malformed(0, "ragged rows".into()));
        }
        Ok(trace)
    }
}

/// One dump line: `cycle,block,toggle,fsm,expr,code` with six decimals.
pub fn coverage_dump_line(s: &CoverageSnapshot) -> String {
    format!(
        "{},{},{},{},{},{}\n",
        s.cycle,
        s.block.percent_string(6),
        s.toggle.percent_string(6),
        s.fsm.percent_string(6),
        s.expr.percent_string(6),
        s.code.percent_string(6)
    )
}

/// Appends the snapshot's dump line to `path`, creating the file if needed.
pub fn write_coverage_dump(snapshot: &CoverageSnapshot, path: &Path) -> io::Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(coverage_dump_line(snapshot).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::coverage::Score;

    #[test]
    fn csv_round_trip() {
        let mut t = ValueTrace::new(vec!["a".into(), "m[0]".into()], vec![3, 1]);
        t.rows.push(TraceRow {
            cycle: 0,
            phase: Phase::Post,
            values: vec![5, 1],
        });
        t.rows.push(TraceRow {
            cycle: 1,
            phase: Phase::Pre,
            values: vec![2, 0],
        });
        let csv = t.to_csv();
        assert!(csv.starts_with("cycle,phase,signal,value\n0,post,a,101\n0,post,m[0],1\n1,pre,a,010\n"));
        assert_eq!(ValueTrace::from_csv(&csv).unwrap(), t);
    }

    #[test]
    fn dump_line_format() {
        let s = CoverageSnapshot {
            cycle: 1,
            block: Score::new(1, 3),
            toggle: Score::new(0, 4),
            fsm: Score::new(0, 0),
            expr: Score::new(2, 2),
            code: Score::new(3, 9),
            new_items: vec![],
        };
        assert_eq!(coverage_dump_line(&s), "1,33.333333,0.000000,100.000000,100.000000,33.333333\n");
    }
}
