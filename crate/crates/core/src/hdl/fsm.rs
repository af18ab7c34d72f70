//! Finite-state-machine recognition.
//!
//! A register is a state register when every assignment to it is a named
//! constant (or a ternary choosing between named constants) and a clocked
//! process switches on it with a full `case` whose labels are named
//! constants. Transition arcs are collected from the case arms.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use super::ir::*;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FsmState {
    pub name: String,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FsmDescriptor {
    #[serde(skip)]
    pub state_register: SignalId,
    pub register_name: String,
    pub states: Vec<FsmState>,
    /// `(from, to)` indices into `states`, sorted and deduplicated.
    pub transitions: Vec<(usize, usize)>,
}

impl FsmDescriptor {
    pub fn state_index(&self, value: u64) -> Option<usize> {
        self.states.iter().position(|s| s.value == value)
    }

    pub fn transition_index(&self, from: usize, to: usize) -> Option<usize> {
        self.transitions.binary_search(&(from, to)).ok()
    }
}

pub fn detect_fsms(ir: &DesignIR) -> Vec<FsmDescriptor> {
    let mut out = Vec::new();
    for (idx, sig) in ir.signals.iter().enumerate() {
        let id = SignalId(idx);
        if sig.kind != SignalKind::Reg || sig.array.is_some() {
            continue;
        }
        if let Some(fsm) = analyze(ir, id) {
            out.push(fsm);
        }
    }
    out
}

fn analyze(ir: &DesignIR, reg: SignalId) -> Option<FsmDescriptor> {
    let mut targets: BTreeSet<usize> = BTreeSet::new();
    let mut assigned = false;
    let mut all_named = true;
    ir.visit_process_assigns(&mut |lv, value| {
        if lv.signal() != reg {
            return;
        }
        assigned = true;
        if !matches!(lv, LValue::Whole(_)) || !named_constants(value, &mut targets) {
            all_named = false;
        }
    });
    if !assigned || !all_named {
        return None;
    }

    let (items, default) = find_case(ir, reg)?;
    let width = ir.signal(reg).width;
    let mut labelled: BTreeSet<usize> = BTreeSet::new();
    for it in items {
        for l in &it.labels {
            match l {
                Expr::Param(p) => {
                    labelled.insert(*p);
                }
                _ => return None,
            }
        }
    }
    let covers_all = width < 16 && {
        let values: HashSet<u64> = labelled.iter().map(|p| ir.params[*p].value).collect();
        values.len() as u64 == 1u64 << width
    };
    if default.is_none() && !covers_all {
        return None;
    }

    // states: named constants by declaration order, aliases folded by value
    let mut states: Vec<FsmState> = Vec::new();
    for p in targets.iter().chain(labelled.iter()).collect::<BTreeSet<_>>() {
        let param = &ir.params[*p];
        if !states.iter().any(|s| s.value == param.value) {
            states.push(FsmState {
                name: param.name.clone(),
                value: param.value,
            });
        }
    }
    let index_of = |p: usize| states.iter().position(|s| s.value == ir.params[p].value);

    let mut arcs: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut labelled_states = HashSet::new();
    for it in items {
        let mut tos = BTreeSet::new();
        collect_targets(&it.arm.body, reg, &mut tos);
        let holds = !always_assigns(&it.arm.body, reg);
        for l in &it.labels {
            let Expr::Param(p) = l else { continue };
            let from = index_of(*p)?;
            labelled_states.insert(from);
            for t in &tos {
                arcs.insert((from, index_of(*t)?));
            }
            if holds {
                arcs.insert((from, from));
            }
        }
    }
    if let Some(d) = default {
        let mut tos = BTreeSet::new();
        collect_targets(&d.body, reg, &mut tos);
        let holds = !always_assigns(&d.body, reg);
        for from in 0..states.len() {
            if labelled_states.contains(&from) {
                continue;
            }
            for t in &tos {
                arcs.insert((from, index_of(*t)?));
            }
            if holds {
                arcs.insert((from, from));
            }
        }
    }

    Some(FsmDescriptor {
        state_register: reg,
        register_name: ir.signal(reg).name.clone(),
        states,
        transitions: arcs.into_iter().collect(),
    })
}

/// True when `e` is a named constant or a ternary tree over named constants.
fn named_constants(e: &Expr, out: &mut BTreeSet<usize>) -> bool {
    match e {
        Expr::Param(p) => {
            out.insert(*p);
            true
        }
        Expr::Ternary { then, otherwise, .. } => named_constants(then, out) && named_constants(otherwise, out),
        _ => false,
    }
}

fn find_case(ir: &DesignIR, reg: SignalId) -> Option<(&[CaseItem], Option<&Arm>)> {
    fn walk(stmts: &[Stmt], reg: SignalId) -> Option<(&[CaseItem], Option<&Arm>)> {
        for s in stmts {
            let found = match s {
                Stmt::Case { subject, items, default } => {
                    if *subject == Expr::Signal(reg) {
                        return Some((items.as_slice(), default.as_ref()));
                    }
                    items
                        .iter()
                        .find_map(|it| walk(&it.arm.body, reg))
                        .or_else(|| default.as_ref().and_then(|d| walk(&d.body, reg)))
                }
                Stmt::If { then, otherwise, .. } => {
                    walk(&then.body, reg).or_else(|| otherwise.as_ref().and_then(|o| walk(&o.body, reg)))
                }
                Stmt::Assign { .. } => None,
            };
            if found.is_some() {
                return found;
            }
        }
        None
    }
    ir.processes.iter().find_map(|p| walk(&p.body.body, reg))
}

fn collect_targets(stmts: &[Stmt], reg: SignalId, out: &mut BTreeSet<usize>) {
    for s in stmts {
        match s {
            Stmt::Assign { target, value, .. } if target.signal() == reg => {
                named_constants(value, out);
            }
            Stmt::Assign { .. } => {}
            Stmt::If { then, otherwise, .. } => {
                collect_targets(&then.body, reg, out);
                if let Some(o) = otherwise {
                    collect_targets(&o.body, reg, out);
                }
            }
            Stmt::Case { items, default, .. } => {
                for it in items {
                    collect_targets(&it.arm.body, reg, out);
                }
                if let Some(d) = default {
                    collect_targets(&d.body, reg, out);
                }
            }
        }
    }
}

/// Whether every path through `stmts` assigns `reg`.
fn always_assigns(stmts: &[Stmt], reg: SignalId) -> bool {
    stmts.iter().any(|s| match s {
        Stmt::Assign { target, .. } => target.signal() == reg,
        Stmt::If { then, otherwise, .. } => {
            always_assigns(&then.body, reg) && otherwise.as_ref().is_some_and(|o| always_assigns(&o.body, reg))
        }
        Stmt::Case { items, default, .. } => {
            default.as_ref().is_some_and(|d| always_assigns(&d.body, reg))
                && items.iter().all(|it| always_assigns(&it.arm.body, reg))
        }
    })
}
