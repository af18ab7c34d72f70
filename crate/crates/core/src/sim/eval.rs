//! Two-state expression evaluation with Verilog unsigned width rules.
//!
//! Context-determined operators (`+ - * / % & | ^ ~` and ternary branches)
//! are computed at `max(context, self width)`; comparisons size their
//! operands to the wider side; logical and reduction operators see their
//! operands at self width.

use crate::bits::mask;
use crate::hdl::ir::*;

/// Receives condition-site outcomes during evaluation.
pub(crate) trait SiteSink {
    fn site(&mut self, id: usize, value: bool);
}

pub(crate) struct NoSink;

impl SiteSink for NoSink {
    fn site(&mut self, _: usize, _: bool) {}
}

pub(crate) struct Evaluator<'a> {
    pub ir: &'a DesignIR,
    /// First storage slot of each signal.
    pub base: &'a [usize],
}

impl<'a> Evaluator<'a> {
    pub fn eval(&self, e: &Expr, ctx: u32, vals: &[u64], sink: &mut dyn SiteSink) -> u64 {
        let w = ctx.max(e.width(self.ir)).min(64);
        let m = mask(w);
        match e {
            Expr::Const { value, .. } => value & m,
            Expr::Param(p) => self.ir.params[*p].value & m,
            Expr::Signal(s) => vals[self.base[s.0]],
            Expr::Slice { signal, msb, lsb } => (vals[self.base[signal.0]] >> lsb) & mask(msb - lsb + 1),
            Expr::Bit { signal, index } => {
                let sig = self.ir.signal(*signal);
                let i = self.eval(index, 0, vals, sink) as i64 - sig.lsb;
                if i < 0 || i >= sig.width as i64 {
                    0
                } else {
                    (vals[self.base[signal.0]] >> i) & 1
                }
            }
            Expr::Element { signal, index } => match self.element_slot(*signal, index, vals, sink) {
                Some(slot) => vals[slot],
                None => 0,
            },
            Expr::Unary { op, arg } => {
                let aw = arg.width(self.ir);
                match op {
                    UnaryOp::Not => !self.eval(arg, w, vals, sink) & m,
                    UnaryOp::Neg => self.eval(arg, w, vals, sink).wrapping_neg() & m,
                    UnaryOp::Plus => self.eval(arg, w, vals, sink),
                    UnaryOp::LogicalNot => (self.eval(arg, aw, vals, sink) == 0) as u64,
                    UnaryOp::RedAnd => (self.eval(arg, aw, vals, sink) == mask(aw)) as u64,
                    UnaryOp::RedNand => (self.eval(arg, aw, vals, sink) != mask(aw)) as u64,
                    UnaryOp::RedOr => (self.eval(arg, aw, vals, sink) != 0) as u64,
                    UnaryOp::RedNor => (self.eval(arg, aw, vals, sink) == 0) as u64,
                    UnaryOp::RedXor => (self.eval(arg, aw, vals, sink).count_ones() & 1) as u64,
                    UnaryOp::RedXnor => (!self.eval(arg, aw, vals, sink).count_ones() & 1) as u64,
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                use BinaryOp::*;
                match op {
                    LogicalAnd | LogicalOr => {
                        let a = self.eval(lhs, 0, vals, sink) != 0;
                        let b = self.eval(rhs, 0, vals, sink) != 0;
                        (if *op == LogicalAnd { a && b } else { a || b }) as u64
                    }
                    Eq | Ne | Lt | Le | Gt | Ge => {
                        let ow = lhs.width(self.ir).max(rhs.width(self.ir));
                        let a = self.eval(lhs, ow, vals, sink);
                        let b = self.eval(rhs, ow, vals, sink);
                        (match op {
                            Eq => a == b,
                            Ne => a != b,
                            Lt => a < b,
                            Le => a <= b,
                            Gt => a > b,
                            _ => a >= b,
                        }) as u64
                    }
                    Shl | Shr => {
                        let a = self.eval(lhs, w, vals, sink);
                        let n = self.eval(rhs, 0, vals, sink);
                        let r = if n >= 64 {
                            0
                        } else if *op == Shl {
                            a << n
                        } else {
                            a >> n
                        };
                        r & m
                    }
                    _ => {
                        let a = self.eval(lhs, w, vals, sink);
                        let b = self.eval(rhs, w, vals, sink);
                        let r = match op {
                            Add => a.wrapping_add(b),
                            Sub => a.wrapping_sub(b),
                            Mul => a.wrapping_mul(b),
                            // two-state: division by zero yields zero
                            Div => a.checked_div(b).unwrap_or(0),
                            Mod => a.checked_rem(b).unwrap_or(0),
                            And => a & b,
                            Or => a | b,
                            Xor => a ^ b,
                            Xnor => !(a ^ b),
                            _ => unreachable!(),
                        };
                        r & m
                    }
                }
            }
            Expr::Ternary { cond, then, otherwise } => {
                let c = self.condition(cond, vals, sink);
                let t = self.eval(then, w, vals, sink);
                let o = self.eval(otherwise, w, vals, sink);
                if c {
                    t
                } else {
                    o
                }
            }
            Expr::Concat(parts) => {
                let mut acc = 0u64;
                for p in parts {
                    let pw = p.width(self.ir);
                    let v = self.eval(p, pw, vals, sink);
                    acc = if pw >= 64 { v } else { (acc << pw) | v };
                }
                acc & m
            }
            Expr::Repeat { count, expr } => {
                let pw = expr.width(self.ir);
                let v = self.eval(expr, pw, vals, sink);
                let mut acc = 0u64;
                for _ in 0..*count {
                    acc = if pw >= 64 { v } else { (acc << pw) | v };
                }
                acc & m
            }
        }
    }

    /// Evaluates a condition, reporting each leaf site's outcome first.
    pub fn condition(&self, cond: &Condition, vals: &[u64], sink: &mut dyn SiteSink) -> bool {
        for &s in &cond.sites {
            let v = self.eval(&self.ir.cond_sites[s].expr, 0, vals, sink) != 0;
            sink.site(s, v);
        }
        self.eval(&cond.expr, 0, vals, sink) != 0
    }

    pub fn element_slot(&self, signal: SignalId, index: &Expr, vals: &[u64], sink: &mut dyn SiteSink) -> Option<usize> {
        let sig = self.ir.signal(signal);
        let (first, n) = sig.array?;
        let i = self.eval(index, 0, vals, sink) as i64 - first;
        if i < 0 || i >= n as i64 {
            None
        } else {
            Some(self.base[signal.0] + i as usize)
        }
    }
}
