//! Recomputes coverage from a recorded value trace without touching the
//! simulator's instrumentation. Conditions are re-evaluated by a separate
//! expression interpreter over the recorded pre-edge values.

use covgen::hdl::ir::*;
use covgen::hdl::FsmDescriptor;
use covgen::sim::{Phase, ValueTrace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleCoverage {
    pub blocks: Vec<bool>,
    pub toggle_rose: Vec<bool>,
    pub toggle_fell: Vec<bool>,
    pub fsm_states: Vec<Vec<bool>>,
    pub fsm_arcs: Vec<Vec<bool>>,
    pub expr_true: Vec<bool>,
    pub expr_false: Vec<bool>,
}

fn ones(w: u32) -> u128 {
    if w >= 128 {
        u128::MAX
    } else {
        (1u128 << w) - 1
    }
}

struct Replay<'a> {
    ir: &'a DesignIR,
    trace: &'a ValueTrace,
    cov: &'a mut OracleCoverage,
}

impl Replay<'_> {
    fn slot_of(&self, sig: SignalId, word: Option<i64>) -> Option<usize> {
        let s = self.ir.signal(sig);
        let name = match (s.array, word) {
            (Some((first, n)), Some(i)) => {
                if i < first || i >= first + n as i64 {
                    return None;
                }
                format!("{}[{}]", s.name, i)
            }
            _ => s.name.clone(),
        };
        Some(self.trace.slot(&name).expect("every signal is traced"))
    }

    fn self_width(&self, e: &Expr) -> u32 {
        match e {
            Expr::Const { width, .. } => *width,
            Expr::Param(p) => self.ir.params[*p].width,
            Expr::Signal(s) | Expr::Element { signal: s, .. } => self.ir.signal(*s).width,
            Expr::Bit { .. } => 1,
            Expr::Slice { msb, lsb, .. } => msb - lsb + 1,
            Expr::Unary { op, arg } => match op {
                UnaryOp::Not | UnaryOp::Neg | UnaryOp::Plus => self.self_width(arg),
                _ => 1,
            },
            Expr::Binary { op, lhs, rhs } => match op {
                BinaryOp::Shl | BinaryOp::Shr => self.self_width(lhs),
                o if o.is_comparison() || matches!(o, BinaryOp::LogicalAnd | BinaryOp::LogicalOr) => 1,
                _ => self.self_width(lhs).max(self.self_width(rhs)),
            },
            Expr::Ternary { then, otherwise, .. } => self.self_width(then).max(self.self_width(otherwise)),
            Expr::Concat(parts) => parts.iter().map(|p| self.self_width(p)).sum(),
            Expr::Repeat { count, expr } => count * self.self_width(expr),
        }
    }

    fn truth(&mut self, e: &Expr, v: &[u64]) -> bool {
        let w = self.self_width(e);
        self.value(e, w, v) != 0
    }

    fn cond(&mut self, c: &Condition, v: &[u64]) -> bool {
        for &s in &c.sites {
            let leaf = self.ir.cond_sites[s].expr.clone();
            let t = self.truth(&leaf, v);
            self.hit_site(s, t);
        }
        self.truth(&c.expr, v)
    }

    fn hit_site(&mut self, s: usize, t: bool) {
        if t {
            self.cov.expr_true[s] = true;
        } else {
            self.cov.expr_false[s] = true;
        }
    }

    /// Value of `e` sized to `w` bits (`w` already includes the context).
    fn value(&mut self, e: &Expr, w: u32, v: &[u64]) -> u128 {
        let m = ones(w);
        let r: u128 = match e {
            Expr::Const { value, .. } => *value as u128,
            Expr::Param(p) => self.ir.params[*p].value as u128,
            Expr::Signal(s) => v[self.slot_of(*s, None).unwrap()] as u128,
            Expr::Slice { signal, msb, lsb } => {
                (v[self.slot_of(*signal, None).unwrap()] as u128 >> lsb) & ones(msb - lsb + 1)
            }
            Expr::Bit { signal, index } => {
                let iw = self.self_width(index);
                let i = self.value(index, iw, v) as i128 - self.ir.signal(*signal).lsb as i128;
                if i < 0 || i >= self.ir.signal(*signal).width as i128 {
                    0
                } else {
                    (v[self.slot_of(*signal, None).unwrap()] as u128 >> i) & 1
                }
            }
            Expr::Element { signal, index } => {
                let iw = self.self_width(index);
                let i = self.value(index, iw, v) as i64;
                match self.slot_of(*signal, Some(i)) {
                    Some(slot) => v[slot] as u128,
                    None => 0,
                }
            }
            Expr::Unary { op, arg } => {
                let aw = self.self_width(arg);
                match op {
                    UnaryOp::Not => !self.value(arg, w, v),
                    UnaryOp::Neg => self.value(arg, w, v).wrapping_neg(),
                    UnaryOp::Plus => self.value(arg, w, v),
                    _ => {
                        let a = self.value(arg, aw, v);
                        let full = a == ones(aw);
                        let odd = a.count_ones() % 2 == 1;
                        let b = match op {
                            UnaryOp::LogicalNot | UnaryOp::RedNor => a == 0,
                            UnaryOp::RedOr => a != 0,
                            UnaryOp::RedAnd => full,
                            UnaryOp::RedNand => !full,
                            UnaryOp::RedXor => odd,
                            UnaryOp::RedXnor => !odd,
                            _ => unreachable!(),
                        };
                        b as u128
                    }
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                use BinaryOp::*;
                match op {
                    LogicalAnd | LogicalOr => {
                        let a = self.truth(lhs, v);
                        let b = self.truth(rhs, v);
                        (if *op == LogicalAnd { a & b } else { a | b }) as u128
                    }
                    Eq | Ne | Lt | Le | Gt | Ge => {
                        let cw = self.self_width(lhs).max(self.self_width(rhs));
                        let a = self.value(lhs, cw, v);
                        let b = self.value(rhs, cw, v);
                        let ord = a.cmp(&b);
                        use std::cmp::Ordering::*;
                        (match op {
                            Eq => ord == Equal,
                            Ne => ord != Equal,
                            Lt => ord == Less,
                            Le => ord != Greater,
                            Gt => ord == Greater,
                            _ => ord != Less,
                        }) as u128
                    }
                    Shl | Shr => {
                        let a = self.value(lhs, w, v);
                        let nw = self.self_width(rhs);
                        let n = self.value(rhs, nw, v);
                        if n >= w as u128 {
                            0
                        } else if *op == Shl {
                            a << n
                        } else {
                            a >> n
                        }
                    }
                    _ => {
                        let a = self.value(lhs, w, v);
                        let b = self.value(rhs, w, v);
                        match op {
                            Add => a.wrapping_add(b),
                            Sub => a.wrapping_sub(b),
                            Mul => a.wrapping_mul(b),
                            Div => {
                                if b == 0 {
                                    0
                                } else {
                                    a / b
                                }
                            }
                            Mod => {
                                if b == 0 {
                                    0
                                } else {
                                    a % b
                                }
                            }
                            And => a & b,
                            Or => a | b,
                            Xor => a ^ b,
                            Xnor => !(a ^ b),
                            _ => unreachable!(),
                        }
                    }
                }
            }
            Expr::Ternary { cond, then, otherwise } => {
                let c = self.cond(cond, v);
                let t = self.value(then, w, v);
                let o = self.value(otherwise, w, v);
                if c {
                    t
                } else {
                    o
                }
            }
            Expr::Concat(parts) => {
                let mut acc = 0u128;
                for p in parts {
                    let pw = self.self_width(p);
                    acc = (acc << pw) | self.value(p, pw, v);
                }
                acc
            }
            Expr::Repeat { count, expr } => {
                let pw = self.self_width(expr);
                let x = self.value(expr, pw, v);
                (0..*count).fold(0u128, |acc, _| (acc << pw) | x)
            }
        };
        r & m
    }

    fn lvalue_width(&self, lv: &LValue) -> u32 {
        match lv {
            LValue::Whole(s) | LValue::Element { signal: s, .. } => self.ir.signal(*s).width,
            LValue::Bit { .. } => 1,
            LValue::Slice { msb, lsb, .. } => msb - lsb + 1,
        }
    }

    /// Runs a process body over `v`, applying blocking writes in place.
    fn exec(&mut self, arm: &Arm, v: &mut Vec<u64>) {
        self.cov.blocks[arm.block] = true;
        for s in &arm.body {
            match s {
                Stmt::If { cond, then, otherwise } => {
                    if self.cond(cond, v) {
                        self.exec(then, v);
                    } else if let Some(o) = otherwise {
                        self.exec(o, v);
                    }
                }
                Stmt::Case { items, default, .. } => {
                    let mut matched = false;
                    for it in items {
                        let leaf = self.ir.cond_sites[it.site].expr.clone();
                        let t = self.truth(&leaf, v);
                        self.hit_site(it.site, t);
                        if t {
                            self.exec(&it.arm, v);
                            matched = true;
                            break;
                        }
                    }
                    if !matched {
                        if let Some(d) = default {
                            self.exec(d, v);
                        }
                    }
                }
                Stmt::Assign { target, value, blocking } => {
                    let tw = self.lvalue_width(target);
                    let w = tw.max(self.self_width(value));
                    let x = (self.value(value, w, v) & ones(tw)) as u64;
                    // index expressions may hold ternaries too
                    let dest = match target {
                        LValue::Whole(s) => self.slot_of(*s, None).map(|slot| (slot, u64::MAX, 0)),
                        LValue::Slice { signal, msb: _, lsb } => {
                            self.slot_of(*signal, None).map(|slot| (slot, (ones(tw) as u64) << lsb, *lsb))
                        }
                        LValue::Bit { signal, index } => {
                            let iw = self.self_width(index);
                            let i = self.value(index, iw, v) as i64 - self.ir.signal(*signal).lsb;
                            if i < 0 || i >= self.ir.signal(*signal).width as i64 {
                                None
                            } else {
                                self.slot_of(*signal, None).map(|slot| (slot, 1u64 << i, i as u32))
                            }
                        }
                        LValue::Element { signal, index } => {
                            let iw = self.self_width(index);
                            let i = self.value(index, iw, v) as i64;
                            self.slot_of(*signal, Some(i)).map(|slot| (slot, u64::MAX, 0))
                        }
                    };
                    if let (true, Some((slot, m, shift))) = (*blocking, dest) {
                        let m = m & (ones(self.trace.widths[slot]) as u64);
                        v[slot] = (v[slot] & !m) | ((x << shift) & m);
                    }
                }
            }
        }
    }
}

pub fn replay(ir: &DesignIR, fsms: &[FsmDescriptor], trace: &ValueTrace) -> OracleCoverage {
    let bits: usize = trace.widths.iter().map(|w| *w as usize).sum();
    let mut cov = OracleCoverage {
        blocks: vec![false; ir.blocks.len()],
        toggle_rose: vec![false; bits],
        toggle_fell: vec![false; bits],
        fsm_states: fsms.iter().map(|f| vec![false; f.states.len()]).collect(),
        fsm_arcs: fsms.iter().map(|f| vec![false; f.transitions.len()]).collect(),
        expr_true: vec![false; ir.cond_sites.len()],
        expr_false: vec![false; ir.cond_sites.len()],
    };
    let clock_names: Vec<&str> = ir.processes.iter().map(|p| ir.signal(p.clock).name.as_str()).collect();
    let mut bit_base = vec![0usize; trace.widths.len()];
    for i in 1..bit_base.len() {
        bit_base[i] = bit_base[i - 1] + trace.widths[i - 1] as usize;
    }

    let posts: Vec<_> = trace.rows.iter().filter(|r| r.phase == Phase::Post).collect();
    for pair in posts.windows(2) {
        let (before, after) = (pair[0], pair[1]);
        for (slot, name) in trace.slots.iter().enumerate() {
            for b in 0..trace.widths[slot] as usize {
                let (x, y) = ((before.values[slot] >> b) & 1, (after.values[slot] >> b) & 1);
                if clock_names.contains(&name.as_str()) {
                    // one full clock period per cycle
                    cov.toggle_rose[bit_base[slot] + b] = true;
                    cov.toggle_fell[bit_base[slot] + b] = true;
                } else if x == 0 && y == 1 {
                    cov.toggle_rose[bit_base[slot] + b] = true;
                } else if x == 1 && y == 0 {
                    cov.toggle_fell[bit_base[slot] + b] = true;
                }
            }
        }
        for (fi, f) in fsms.iter().enumerate() {
            let slot = trace.slot(&f.register_name).unwrap();
            let from = f.states.iter().position(|s| s.value == before.values[slot]);
            let to = f.states.iter().position(|s| s.value == after.values[slot]);
            if let Some(t) = to {
                cov.fsm_states[fi][t] = true;
                if let Some(fr) = from {
                    if let Some(a) = f.transitions.iter().position(|&arc| arc == (fr, t)) {
                        cov.fsm_arcs[fi][a] = true;
                    }
                }
            }
        }
    }

    let mut r = Replay {
        ir,
        trace,
        cov: &mut cov,
    };
    for row in trace.rows.iter().filter(|r| r.phase == Phase::Pre) {
        let mut v = row.values.clone();
        for a in &ir.assigns {
            if let LValue::Bit { index, .. } | LValue::Element { index, .. } = &a.target {
                let iw = r.self_width(index);
                r.value(index, iw, &v);
            }
            let tw = r.lvalue_width(&a.target);
            let w = tw.max(r.self_width(&a.value));
            r.value(&a.value, w, &v);
        }
        for p in &ir.processes {
            r.exec(&p.body, &mut v);
        }
    }
    cov
}
