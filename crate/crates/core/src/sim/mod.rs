//! Cycle-based two-state simulation with coverage instrumentation.
//!
//! One [`SimInstance::step_cycle`] call is one rising clock edge:
//!
//! 1. drive the inputs and settle continuous assigns (ternary conditions
//!    evaluated here are recorded);
//! 2. run every clocked process, recording executed blocks and condition
//!    outcomes; blocking writes land immediately, non-blocking writes are
//!    queued;
//! 3. commit the queued writes and settle again.
//!
//! Toggle and FSM coverage are sampled on the post-edge state. The clock
//! itself is never a stored value; its rise and fall items are credited on
//! the first edge.

pub mod coverage;
mod eval;
pub mod trace;

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::{mask, BitVector};
use crate::hdl::ir::*;
use crate::hdl::{detect_fsms, FsmDescriptor};
pub use coverage::{CoverItem, CoverageDb, CoverageSnapshot, CoverageType, Score};
use eval::{Evaluator, NoSink, SiteSink};
pub use trace::{coverage_dump_line, write_coverage_dump, Phase, TraceRow, ValueTrace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("combinational cycle through `{0}`")]
    CombinationalCycle(String),
    #[error("design has more than one clock: {0:?}")]
    MultipleClocks(Vec<String>),
    #[error("port `{port}` expects {expected} bits, got {got}")]
    WidthMismatch { port: String, expected: u32, got: u32 },
    #[error("unknown input port `{0}`")]
    UnknownPort(String),
    #[error("clock port `{0}` is driven by the simulator and must not be supplied")]
    ClockDriven(String),
    #[error("input port `{0}` was not supplied")]
    MissingInput(String),
}

struct Marker<'a> {
    db: &'a mut CoverageDb,
    new: &'a mut Vec<CoverItem>,
}

impl SiteSink for Marker<'_> {
    fn site(&mut self, id: usize, value: bool) {
        self.db.mark_site(id, value, self.new);
    }
}

#[derive(Debug, Clone)]
pub struct SimInstance {
    ir: Arc<DesignIR>,
    /// First storage slot of each signal.
    base: Vec<usize>,
    slot_width: Vec<u32>,
    /// First toggle bit of each slot.
    toggle_base: Vec<usize>,
    vals: Vec<u64>,
    /// Post-edge values of the previous cycle.
    prev: Vec<u64>,
    comb: Vec<usize>,
    clock: Option<SignalId>,
    inputs: Vec<SignalId>,
    outputs: Vec<SignalId>,
    fsms: Vec<FsmDescriptor>,
    fsm_prev: Vec<Option<usize>>,
    cycle: u64,
    db: CoverageDb,
    nba: Vec<(usize, u64, u64)>,
    trace: Option<ValueTrace>,
}

impl SimInstance {
    /// Builds a simulator with every register and input at zero.
    pub fn elaborate(ir: impl Into<Arc<DesignIR>>) -> Result<Self, SimError> {
        let ir: Arc<DesignIR> = ir.into();
        let clocks = ir.clocks();
        if clocks.len() > 1 {
            return Err(SimError::MultipleClocks(
                clocks.iter().map(|c| ir.signal(*c).name.clone()).collect(),
            ));
        }
        let comb = ir.comb_order().map_err(|e| match e {
            crate::hdl::HdlError::CombinationalCycle(n) => SimError::CombinationalCycle(n),
            other => SimError::CombinationalCycle(other.to_string()),
        })?;

        let mut base = Vec::with_capacity(ir.signals.len());
        let mut slot_width = Vec::new();
        let mut toggle_base = Vec::new();
        let mut bits = 0usize;
        for s in &ir.signals {
            base.push(slot_width.len());
            for _ in 0..s.depth() {
                slot_width.push(s.width);
                toggle_base.push(bits);
                bits += s.width as usize;
            }
        }
        let clock = clocks.first().copied();
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for &p in &ir.ports {
            match ir.signal(p).direction {
                Some(Direction::Output) => outputs.push(p),
                _ if Some(p) == clock => {}
                _ => inputs.push(p),
            }
        }
        let fsms = detect_fsms(&ir);
        let db = CoverageDb::new(ir.blocks.len(), bits, &fsms, ir.cond_sites.len());
        let n = slot_width.len();
        let mut sim = SimInstance {
            fsm_prev: vec![None; fsms.len()],
            ir,
            base,
            slot_width,
            toggle_base,
            vals: vec![0; n],
            prev: vec![0; n],
            comb,
            clock,
            inputs,
            outputs,
            fsms,
            cycle: 0,
            db,
            nba: Vec::new(),
            trace: None,
        };
        sim.settle(false, &mut Vec::new());
        sim.prev.copy_from_slice(&sim.vals);
        for (i, f) in sim.fsms.iter().enumerate() {
            sim.fsm_prev[i] = f.state_index(sim.vals[sim.base[f.state_register.0]]);
        }
        Ok(sim)
    }

    pub fn ir(&self) -> &Arc<DesignIR> {
        &self.ir
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn coverage(&self) -> &CoverageDb {
        &self.db
    }

    pub fn fsms(&self) -> &[FsmDescriptor] {
        &self.fsms
    }

    pub fn clock(&self) -> Option<SignalId> {
        self.clock
    }

    /// Input ports the caller drives each cycle (everything but the clock),
    /// in header order. This is the order [`step_values`](Self::step_values)
    /// expects.
    pub fn input_ports(&self) -> &[SignalId] {
        &self.inputs
    }

    pub fn output_ports(&self) -> &[SignalId] {
        &self.outputs
    }

    pub fn toggle_bits(&self) -> usize {
        self.db.toggle_rose.len()
    }

    /// Current coverage with no newly-covered items.
    pub fn snapshot(&self) -> CoverageSnapshot {
        CoverageSnapshot::from_db(self.cycle, &self.db, Vec::new())
    }

    /// Current (post-edge) value of a scalar or vector signal.
    pub fn peek(&self, name: &str) -> Option<BitVector> {
        let id = self.ir.find_signal(name)?;
        let sig = self.ir.signal(id);
        if sig.array.is_some() {
            return None;
        }
        BitVector::new(sig.width, self.vals[self.base[id.0]]).ok()
    }

    /// Starts recording a [`ValueTrace`] from the current state.
    pub fn enable_trace(&mut self) {
        let mut names = Vec::with_capacity(self.vals.len());
        for s in &self.ir.signals {
            match s.array {
                Some((first, n)) => names.extend((0..n as i64).map(|i| format!("{}[{}]", s.name, first + i))),
                None => names.push(s.name.clone()),
            }
        }
        let mut t = ValueTrace::new(names, self.slot_width.clone());
        t.rows.push(TraceRow {
            cycle: self.cycle,
            phase: Phase::Post,
            values: self.vals.clone(),
        });
        self.trace = Some(t);
    }

    pub fn trace(&self) -> Option<&ValueTrace> {
        self.trace.as_ref()
    }

    pub fn take_trace(&mut self) -> Option<ValueTrace> {
        self.trace.take()
    }

    /// Runs one clock edge with named inputs. Every non-clock input must be
    /// present with its declared width.
    pub fn step_cycle(
        &mut self,
        inputs: &BTreeMap<String, BitVector>,
    ) -> Result<(BTreeMap<String, BitVector>, CoverageSnapshot), SimError> {
        for name in inputs.keys() {
            let Some(id) = self.ir.find_signal(name).filter(|id| self.ir.ports.contains(id)) else {
                return Err(SimError::UnknownPort(name.clone()));
            };
            if Some(id) == self.clock {
                return Err(SimError::ClockDriven(name.clone()));
            }
            if !self.inputs.contains(&id) {
                return Err(SimError::UnknownPort(name.clone()));
            }
        }
        let mut values = Vec::with_capacity(self.inputs.len());
        for &id in &self.inputs {
            let sig = self.ir.signal(id);
            let v = inputs.get(&sig.name).ok_or_else(|| SimError::MissingInput(sig.name.clone()))?;
            if v.width() != sig.width {
                return Err(SimError::WidthMismatch {
                    port: sig.name.clone(),
                    expected: sig.width,
                    got: v.width(),
                });
            }
            values.push(v.value());
        }
        let snap = self.step_values(&values);
        let outputs = self
            .outputs
            .iter()
            .map(|&id| {
                let sig = self.ir.signal(id);
                let bv = BitVector::new(sig.width, self.vals[self.base[id.0]]).expect("values stay within width");
                (sig.name.clone(), bv)
            })
            .collect();
        Ok((outputs, snap))
    }

    /// Runs one clock edge with raw input values in
    /// [`input_ports`](Self::input_ports) order. Values are truncated to
    /// the port width.
    pub fn step_values(&mut self, inputs: &[u64]) -> CoverageSnapshot {
        assert_eq!(inputs.len(), self.inputs.len(), "one value per input port");
        for (&id, &v) in self.inputs.iter().zip(inputs) {
            let slot = self.base[id.0];
            self.vals[slot] = v & mask(self.slot_width[slot]);
        }
        let mut new = Vec::new();
        self.settle(true, &mut new);
        self.cycle += 1;
        if let Some(t) = &mut self.trace {
            t.rows.push(TraceRow {
                cycle: self.cycle,
                phase: Phase::Pre,
                values: self.vals.clone(),
            });
        }
        self.run_processes(&mut new);
        let mut nba = std::mem::take(&mut self.nba);
        for (slot, m, v) in nba.drain(..) {
            self.vals[slot] = (self.vals[slot] & !m) | (v & m);
        }
        self.nba = nba;
        self.settle(false, &mut new);
        self.sample(&mut new);
        if let Some(t) = &mut self.trace {
            t.rows.push(TraceRow {
                cycle: self.cycle,
                phase: Phase::Post,
                values: self.vals.clone(),
            });
        }
        CoverageSnapshot::from_db(self.cycle, &self.db, new)
    }

    fn settle(&mut self, mark: bool, new: &mut Vec<CoverItem>) {
        let ev = Evaluator {
            ir: &self.ir,
            base: &self.base,
        };
        let mut marker = Marker { db: &mut self.db, new };
        let sink: &mut dyn SiteSink = if mark { &mut marker } else { &mut NoSink };
        for &i in &self.comb {
            let a = &self.ir.assigns[i];
            let w = a.target.width(&self.ir);
            let v = ev.eval(&a.value, w, &self.vals, sink);
            if let Some((slot, m, v)) = target(&ev, &a.target, v, &self.vals, sink) {
                self.vals[slot] = (self.vals[slot] & !m) | (v & m);
            }
        }
    }

    fn run_processes(&mut self, new: &mut Vec<CoverItem>) {
        let ev = Evaluator {
            ir: &self.ir,
            base: &self.base,
        };
        let mut ex = Exec {
            ev: &ev,
            vals: &mut self.vals,
            nba: &mut self.nba,
            mark: Marker { db: &mut self.db, new },
        };
        for p in &self.ir.processes {
            ex.arm(&p.body);
        }
    }

    fn sample(&mut self, new: &mut Vec<CoverItem>) {
        let clock_slot = self.clock.map(|c| self.base[c.0]);
        for slot in 0..self.vals.len() {
            let tb = self.toggle_base[slot];
            if Some(slot) == clock_slot {
                if self.cycle == 1 {
                    self.db.mark_toggle(tb, true, new);
                    self.db.mark_toggle(tb, false, new);
                }
                continue;
            }
            let (old, cur) = (self.prev[slot], self.vals[slot]);
            let mut diff = old ^ cur;
            while diff != 0 {
                let b = diff.trailing_zeros();
                self.db.mark_toggle(tb + b as usize, cur >> b & 1 == 1, new);
                diff &= diff - 1;
            }
        }
        for (i, f) in self.fsms.iter().enumerate() {
            let state = f.state_index(self.vals[self.base[f.state_register.0]]);
            if let Some(s) = state {
                self.db.mark_state(i, s, new);
                if let Some(p) = self.fsm_prev[i] {
                    if let Some(arc) = f.transition_index(p, s) {
                        self.db.mark_arc(i, arc, new);
                    }
                }
            }
            self.fsm_prev[i] = state;
        }
        self.prev.copy_from_slice(&self.vals);
    }
}

/// Resolves an assignment target to `(slot, bit mask, shifted value)`;
/// `None` for out-of-range selects, which write nothing.
fn target(ev: &Evaluator, lv: &LValue, v: u64, vals: &[u64], sink: &mut dyn SiteSink) -> Option<(usize, u64, u64)> {
    let ir = ev.ir;
    match lv {
        LValue::Whole(s) => Some((ev.base[s.0], mask(ir.signal(*s).width), v)),
        LValue::Slice { signal, msb, lsb } => {
            let m = mask(msb - lsb + 1);
            Some((ev.base[signal.0], m << lsb, (v & m) << lsb))
        }
        LValue::Bit { signal, index } => {
            let sig = ir.signal(*signal);
            let i = ev.eval(index, 0, vals, sink) as i64 - sig.lsb;
            if i < 0 || i >= sig.width as i64 {
                return None;
            }
            Some((ev.base[signal.0], 1 << i, (v & 1) << i))
        }
        LValue::Element { signal, index } => {
            let slot = ev.element_slot(*signal, index, vals, sink)?;
            Some((slot, mask(ir.signal(*signal).width), v))
        }
    }
}

struct Exec<'a, 'b> {
    ev: &'a Evaluator<'a>,
    vals: &'a mut Vec<u64>,
    nba: &'a mut Vec<(usize, u64, u64)>,
    mark: Marker<'b>,
}

impl Exec<'_, '_> {
    fn arm(&mut self, arm: &Arm) {
        self.mark.db.mark_block(arm.block, self.mark.new);
        for s in &arm.body {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        let ir = self.ev.ir;
        match s {
            Stmt::If { cond, then, otherwise } => {
                if self.ev.condition(cond, self.vals, &mut self.mark) {
                    self.arm(then);
                } else if let Some(o) = otherwise {
                    self.arm(o);
                }
            }
            Stmt::Case { items, default, .. } => {
                // items are tried in order; later items are not evaluated
                for it in items {
                    let hit = self.ev.eval(&ir.cond_sites[it.site].expr, 0, self.vals, &mut self.mark) != 0;
                    self.mark.site(it.site, hit);
                    if hit {
                        self.arm(&it.arm);
                        return;
                    }
                }
                if let Some(d) = default {
                    self.arm(d);
                }
            }
            Stmt::Assign { target: lv, value, blocking } => {
                let w = lv.width(ir);
                let v = self.ev.eval(value, w, self.vals, &mut self.mark);
                if let Some((slot, m, v)) = target(self.ev, lv, v, self.vals, &mut self.mark) {
                    if *blocking {
                        self.vals[slot] = (self.vals[slot] & !m) | (v & m);
                    } else {
                        self.nba.push((slot, m, v));
                    }
                }
            }
        }
    }
}
