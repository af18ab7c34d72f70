//! Resolved intermediate representation of a parsed design.
//!
//! Every name is resolved to an index into [`DesignIR::signals`] or
//! [`DesignIR::params`]. Basic blocks and condition sites carry dense ids
//! assigned in source (pre-order) traversal order, which the coverage
//! database uses directly as item indices.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::HdlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignalId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
    Inout,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Input => "input",
            Direction::Output => "output",
            Direction::Inout => "inout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Wire,
    Reg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub name: String,
    pub width: u32,
    /// Declared index of the least-significant bit (`[7:4]` gives 4).
    pub lsb: i64,
    pub kind: SignalKind,
    pub direction: Option<Direction>,
    /// Unpacked array bounds as `(first index, element count)`.
    pub array: Option<(i64, u32)>,
}

impl Signal {
    /// Number of storage words (1 for scalars and vectors).
    pub fn depth(&self) -> u32 {
        self.array.map(|(_, n)| n).unwrap_or(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: u64,
    pub width: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    /// `~`
    Not,
    /// `!`
    LogicalNot,
    /// unary `-`
    Neg,
    /// unary `+`
    Plus,
    RedAnd,
    RedOr,
    RedXor,
    RedNand,
    RedNor,
    RedXnor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    And,
    Or,
    Xor,
    Xnor,
    Shl,
    Shr,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LogicalAnd,
    LogicalOr,
}

impl BinaryOp {
    pub fn is_comparison(&self) -> bool {
        matches!(
            self,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge
        )
    }
}

/// A boolean condition together with the coverage sites of its leaf operands.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub expr: Box<Expr>,
    pub sites: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const { value: u64, width: u32 },
    Param(usize),
    Signal(SignalId),
    /// Dynamic single-bit select; `index` is in declared numbering.
    Bit { signal: SignalId, index: Box<Expr> },
    /// Constant part select, offsets relative to bit 0 of storage.
    Slice { signal: SignalId, msb: u32, lsb: u32 },
    /// Read of one unpacked array element.
    Element { signal: SignalId, index: Box<Expr> },
    Unary { op: UnaryOp, arg: Box<Expr> },
    Binary { op: BinaryOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Ternary { cond: Condition, then: Box<Expr>, otherwise: Box<Expr> },
    Concat(Vec<Expr>),
    Repeat { count: u32, expr: Box<Expr> },
}

impl Expr {
    /// Calls `f` for every signal this expression reads.
    pub fn visit_signals(&self, f: &mut impl FnMut(SignalId)) {
        match self {
            Expr::Const { .. } | Expr::Param(_) => {}
            Expr::Signal(s) | Expr::Slice { signal: s, .. } => f(*s),
            Expr::Bit { signal, index } | Expr::Element { signal, index } => {
                f(*signal);
                index.visit_signals(f);
            }
            Expr::Unary { arg, .. } => arg.visit_signals(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.visit_signals(f);
                rhs.visit_signals(f);
            }
            Expr::Ternary { cond, then, otherwise } => {
                cond.expr.visit_signals(f);
                then.visit_signals(f);
                otherwise.visit_signals(f);
            }
            Expr::Concat(parts) => parts.iter().for_each(|p| p.visit_signals(f)),
            Expr::Repeat { expr, .. } => expr.visit_signals(f),
        }
    }

    /// Self-determined bit width.
    pub fn width(&self, ir: &DesignIR) -> u32 {
        match self {
            Expr::Const { width, .. } => *width,
            Expr::Param(p) => ir.params[*p].width,
            Expr::Signal(s) | Expr::Element { signal: s, .. } => ir.signals[s.0].width,
            Expr::Bit { .. } => 1,
            Expr::Slice { msb, lsb, .. } => msb - lsb + 1,
            Expr::Unary { op, arg } => match op {
                UnaryOp::Not | UnaryOp::Neg | UnaryOp::Plus => arg.width(ir),
                _ => 1,
            },
            Expr::Binary { op, lhs, rhs } => match op {
                BinaryOp::Shl | BinaryOp::Shr => lhs.width(ir),
                BinaryOp::LogicalAnd | BinaryOp::LogicalOr => 1,
                op if op.is_comparison() => 1,
                _ => lhs.width(ir).max(rhs.width(ir)),
            },
            Expr::Ternary { then, otherwise, .. } => then.width(ir).max(otherwise.width(ir)),
            Expr::Concat(parts) => parts.iter().map(|p| p.width(ir)).sum(),
            Expr::Repeat { count, expr } => count * expr.width(ir),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LValue {
    Whole(SignalId),
    Bit { signal: SignalId, index: Expr },
    Slice { signal: SignalId, msb: u32, lsb: u32 },
    Element { signal: SignalId, index: Expr },
}

impl LValue {
    pub fn signal(&self) -> SignalId {
        match self {
            LValue::Whole(s)
            | LValue::Bit { signal: s, .. }
            | LValue::Slice { signal: s, .. }
            | LValue::Element { signal: s, .. } => *s,
        }
    }

    pub fn width(&self, ir: &DesignIR) -> u32 {
        match self {
            LValue::Whole(s) | LValue::Element { signal: s, .. } => ir.signals[s.0].width,
            LValue::Bit { .. } => 1,
            LValue::Slice { msb, lsb, .. } => msb - lsb + 1,
        }
    }

    fn visit_index_signals(&self, f: &mut impl FnMut(SignalId)) {
        match self {
            LValue::Bit { index, .. } | LValue::Element { index, .. } => index.visit_signals(f),
            _ => {}
        }
    }
}

/// A statement group that counts as one block-coverage item.
#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub block: usize,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseItem {
    pub labels: Vec<Expr>,
    /// Condition site recording whether this item matched.
    pub site: usize,
    pub arm: Arm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    If {
        cond: Condition,
        then: Arm,
        otherwise: Option<Arm>,
    },
    Case {
        subject: Expr,
        items: Vec<CaseItem>,
        default: Option<Arm>,
    },
    Assign {
        target: LValue,
        value: Expr,
        blocking: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResetSpec {
    pub signal: SignalId,
    pub active_high: bool,
}

/// A clocked `always` block.
#[derive(Debug, Clone, PartialEq)]
pub struct Process {
    pub clock: SignalId,
    /// Asynchronous reset from the sensitivity list, if any.
    pub reset: Option<ResetSpec>,
    pub body: Arm,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContAssign {
    pub target: LValue,
    pub value: Expr,
    pub line: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    ProcessBody,
    IfThen,
    IfElse,
    CaseItem,
    CaseDefault,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockInfo {
    pub kind: BlockKind,
    pub line: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteOrigin {
    If,
    Case,
    Ternary,
}

/// A leaf boolean operand whose true and false outcomes are coverage items.
#[derive(Debug, Clone, PartialEq)]
pub struct CondSite {
    pub expr: Expr,
    pub origin: SiteOrigin,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignIR {
    pub name: String,
    pub signals: Vec<Signal>,
    /// Module ports in header order.
    pub ports: Vec<SignalId>,
    pub params: Vec<Param>,
    pub assigns: Vec<ContAssign>,
    pub processes: Vec<Process>,
    pub blocks: Vec<BlockInfo>,
    pub cond_sites: Vec<CondSite>,
}

impl DesignIR {
    pub fn signal(&self, id: SignalId) -> &Signal {
        &self.signals[id.0]
    }

    pub fn find_signal(&self, name: &str) -> Option<SignalId> {
        self.signals.iter().position(|s| s.name == name).map(SignalId)
    }

    /// Distinct clock signals used by clocked processes, in first-use order.
    pub fn clocks(&self) -> Vec<SignalId> {
        let mut out: Vec<SignalId> = Vec::new();
        for p in &self.processes {
            if !out.contains(&p.clock) {
                out.push(p.clock);
            }
        }
        out
    }

    /// Evaluation order of the continuous assigns, or the first signal on a
    /// combinational loop.
    pub fn comb_order(&self) -> Result<Vec<usize>, HdlError> {
        let n = self.assigns.len();
        let mut drivers: Vec<Vec<usize>> = vec![Vec::new(); self.signals.len()];
        for (i, a) in self.assigns.iter().enumerate() {
            drivers[a.target.signal().0].push(i);
        }
        // edges: driver assign -> reader assign
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut indegree = vec![0usize; n];
        for (i, a) in self.assigns.iter().enumerate() {
            let mut reads = HashSet::new();
            a.value.visit_signals(&mut |s| {
                reads.insert(s);
            });
            a.target.visit_index_signals(&mut |s| {
                reads.insert(s);
            });
            let mut reads: Vec<SignalId> = reads.into_iter().collect();
            reads.sort();
            for s in reads {
                for &d in &drivers[s.0] {
                    succ[d].push(i);
                    indegree[i] += 1;
                }
            }
        }
        let mut ready: Vec<usize> = (0..n).rev().filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop() {
            order.push(i);
            for &j in succ[i].iter().rev() {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.push(j);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
            let name = self.signals[self.assigns[stuck].target.signal().0].name.clone();
            return Err(HdlError::CombinationalCycle(name));
        }
        Ok(order)
    }

    /// Calls `f` for every assignment inside clocked processes.
    pub fn visit_process_assigns<'a>(&'a self, f: &mut impl FnMut(&'a LValue, &'a Expr)) {
        fn walk<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a LValue, &'a Expr)) {
            for s in stmts {
                match s {
                    Stmt::Assign { target, value, .. } => f(target, value),
                    Stmt::If { then, otherwise, .. } => {
                        walk(&then.body, f);
                        if let Some(o) = otherwise {
                            walk(&o.body, f);
                        }
                    }
                    Stmt::Case { items, default, .. } => {
                        for it in items {
                            walk(&it.arm.body, f);
                        }
                        if let Some(d) = default {
                            walk(&d.body, f);
                        }
                    }
                }
            }
        }
        for p in &self.processes {
            walk(&p.body.body, f);
        }
    }
}
