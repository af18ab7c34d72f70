//! Recursive-descent parser for the synthesizable single-clock Verilog
//! subset, producing a resolved [`DesignIR`] in one pass.

use std::collections::HashMap;

use super::ir::*;
use super::lexer::{tokenize, Tok, Token};
use super::HdlError;
use crate::bits::{mask, MAX_WIDTH};

#[derive(Debug, Clone, Copy)]
enum Name {
    Signal(SignalId),
    Param(usize),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    ir: DesignIR,
    names: HashMap<String, Name>,
    /// Header names of a non-ANSI port list, in order.
    header_ports: Vec<String>,
    ansi: bool,
}

type PResult<T> = Result<T, HdlError>;

pub fn parse_design(source: &str) -> Result<DesignIR, HdlError> {
    let toks = tokenize(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        ir: DesignIR {
            name: String::new(),
            signals: Vec::new(),
            ports: Vec::new(),
            params: Vec::new(),
            assigns: Vec::new(),
            processes: Vec::new(),
            blocks: Vec::new(),
            cond_sites: Vec::new(),
        },
        names: HashMap::new(),
        header_ports: Vec::new(),
        ansi: true,
    };
    p.module()?;
    if !matches!(p.peek(), Tok::Eof) {
        if p.is_kw("module") {
            return Err(p.unsupported("multiple modules"));
        }
        return Err(p.syntax());
    }
    p.ir.comb_order()?;
    Ok(p.ir)
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "module" | "endmodule" | "input" | "output" | "inout" | "wire" | "reg" | "assign" | "always"
            | "begin" | "end" | "if" | "else" | "case" | "endcase" | "default" | "posedge"
            | "negedge" | "or" | "parameter" | "localparam" | "initial"
    )
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (u32, u32) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self) -> HdlError {
        let t = &self.toks[self.pos];
        HdlError::Syntax {
            line: t.line,
            col: t.col,
            token: t.tok.describe(),
        }
    }

    fn unsupported(&self, construct: &str) -> HdlError {
        let (line, col) = self.here();
        HdlError::Unsupported {
            construct: construct.to_string(),
            line,
            col,
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.syntax())
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            Err(self.syntax())
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.syntax()),
        }
    }

    fn check_unsupported_keyword(&self) -> PResult<()> {
        if let Tok::Ident(s) = self.peek() {
            let bad = match s.as_str() {
                "initial" => Some("initial"),
                "integer" | "real" | "time" | "genvar" => Some(s.as_str()),
                "generate" | "function" | "task" | "specify" | "primitive" => Some(s.as_str()),
                "for" | "while" | "repeat" | "forever" | "fork" | "wait" | "disable" => Some(s.as_str()),
                "casez" | "casex" => Some(s.as_str()),
                "signed" => Some("signed"),
                "tri" | "supply0" | "supply1" | "wand" | "wor" | "logic" => Some(s.as_str()),
                "always_ff" | "always_comb" | "always_latch" => Some(s.as_str()),
                _ => None,
            };
            if let Some(b) = bad {
                return Err(self.unsupported(b));
            }
        }
        if let Tok::System(s) = self.peek() {
            return Err(self.unsupported(&format!("${s}")));
        }
        Ok(())
    }

    // ---- module structure ----

    fn module(&mut self) -> PResult<()> {
        self.check_unsupported_keyword()?;
        self.expect_kw("module")?;
        self.ir.name = self.ident()?;
        if self.eat_sym("#") {
            self.expect_sym("(")?;
            if !self.is_sym(")") {
                loop {
                    self.eat_kw("parameter");
                    self.param_assignment()?;
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym(")")?;
        }
        if self.eat_sym("(") {
            if !self.is_sym(")") {
                if self.is_kw("input") || self.is_kw("output") || self.is_kw("inout") {
                    self.ansi_ports()?;
                } else {
                    self.ansi = false;
                    loop {
                        let n = self.ident()?;
                        self.header_ports.push(n);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
            }
            self.expect_sym(")")?;
        }
        self.expect_sym(";")?;
        while !self.is_kw("endmodule") {
            if matches!(self.peek(), Tok::Eof) {
                return Err(self.syntax());
            }
            self.item()?;
        }
        self.advance();
        if !self.ansi {
            let mut ports = Vec::new();
            for name in &self.header_ports {
                match self.names.get(name) {
                    Some(Name::Signal(id)) if self.ir.signals[id.0].direction.is_some() => ports.push(*id),
                    _ => {
                        let (line, col) = self.here();
                        return Err(HdlError::UndeclaredSignal {
                            name: name.clone(),
                            line,
                            col,
                        });
                    }
                }
            }
            self.ir.ports = ports;
        }
        Ok(())
    }

    fn direction(&mut self) -> Option<Direction> {
        if self.eat_kw("input") {
            Some(Direction::Input)
        } else if self.eat_kw("output") {
            Some(Direction::Output)
        } else if self.eat_kw("inout") {
            Some(Direction::Inout)
        } else {
            None
        }
    }

    fn ansi_ports(&mut self) -> PResult<()> {
        let mut dir = Direction::Input;
        let mut kind = SignalKind::Wire;
        let mut range = (1u32, 0i64);
        loop {
            if let Some(d) = self.direction() {
                dir = d;
                kind = SignalKind::Wire;
                if self.eat_kw("reg") {
                    kind = SignalKind::Reg;
                } else {
                    self.eat_kw("wire");
                }
                self.check_unsupported_keyword()?;
                range = self.opt_range()?;
            }
            let (line, col) = self.here();
            let name = self.ident()?;
            let id = self.declare(
                Signal {
                    name,
                    width: range.0,
                    lsb: range.1,
                    kind,
                    direction: Some(dir),
                    array: None,
                },
                line,
                col,
            )?;
            self.ir.ports.push(id);
            if !self.eat_sym(",") {
                return Ok(());
            }
        }
    }

    fn declare(&mut self, sig: Signal, line: u32, col: u32) -> PResult<SignalId> {
        if self.names.contains_key(&sig.name) {
            return Err(HdlError::Redeclared {
                name: sig.name,
                line,
                col,
            });
        }
        let id = SignalId(self.ir.signals.len());
        self.names.insert(sig.name.clone(), Name::Signal(id));
        self.ir.signals.push(sig);
        Ok(id)
    }

    /// `[msb:lsb]` or nothing; returns (width, lsb).
    fn opt_range(&mut self) -> PResult<(u32, i64)> {
        if !self.is_sym("[") {
            return Ok((1, 0));
        }
        self.advance();
        let msb = self.const_expr()? as i64;
        self.expect_sym(":")?;
        let lsb = self.const_expr()? as i64;
        self.expect_sym("]")?;
        if msb < lsb {
            return Err(self.unsupported("ascending bit range"));
        }
        let width = (msb - lsb + 1) as u64;
        if width > MAX_WIDTH as u64 {
            return Err(self.unsupported("vector wider than 64 bits"));
        }
        Ok((width as u32, lsb))
    }

    fn item(&mut self) -> PResult<()> {
        self.check_unsupported_keyword()?;
        if let Some(dir) = self.direction() {
            if self.ansi {
                return Err(self.syntax());
            }
            let kind = if self.eat_kw("reg") {
                SignalKind::Reg
            } else {
                self.eat_kw("wire");
                SignalKind::Wire
            };
            self.check_unsupported_keyword()?;
            let (width, lsb) = self.opt_range()?;
            loop {
                let (line, col) = self.here();
                let name = self.ident()?;
                if !self.header_ports.contains(&name) {
                    return Err(HdlError::UndeclaredSignal { name, line, col });
                }
                self.declare(
                    Signal {
                        name,
                        width,
                        lsb,
                        kind,
                        direction: Some(dir),
                        array: None,
                    },
                    line,
                    col,
                )?;
                if !self.eat_sym(",") {
                    break;
                }
            }
            return self.expect_sym(";");
        }
        if self.is_kw("wire") || self.is_kw("reg") {
            let kind = if self.eat_kw("reg") {
                SignalKind::Reg
            } else {
                self.advance();
                SignalKind::Wire
            };
            self.check_unsupported_keyword()?;
            let (width, lsb) = self.opt_range()?;
            loop {
                let (line, col) = self.here();
                let name = self.ident()?;
                let array = if kind == SignalKind::Reg && self.is_sym("[") {
                    self.advance();
                    let a = self.const_expr()? as i64;
                    self.expect_sym(":")?;
                    let b = self.const_expr()? as i64;
                    self.expect_sym("]")?;
                    let (lo, hi) = (a.min(b), a.max(b));
                    if hi - lo + 1 > 4096 {
                        return Err(self.unsupported("memory deeper than 4096 words"));
                    }
                    Some((lo, (hi - lo + 1) as u32))
                } else {
                    None
                };
                // `reg` redeclaration of a non-ANSI output port
                if let Some(Name::Signal(id)) = self.names.get(&name).copied() {
                    let s = &mut self.ir.signals[id.0];
                    if s.direction.is_some() && kind == SignalKind::Reg && s.width == width && array.is_none() {
                        s.kind = SignalKind::Reg;
                        if !self.eat_sym(",") {
                            break;
                        }
                        continue;
                    }
                }
                let id = self.declare(
                    Signal {
                        name,
                        width,
                        lsb,
                        kind,
                        direction: None,
                        array,
                    },
                    line,
                    col,
                )?;
                if kind == SignalKind::Wire && self.eat_sym("=") {
                    let value = self.expr()?;
                    self.ir.assigns.push(ContAssign {
                        target: LValue::Whole(id),
                        value,
                        line,
                    });
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
            return self.expect_sym(";");
        }
        if self.eat_kw("parameter") || self.eat_kw("localparam") {
            loop {
                self.param_assignment()?;
                if !self.eat_sym(",") {
                    break;
                }
            }
            return self.expect_sym(";");
        }
        if self.is_kw("assign") {
            self.advance();
            loop {
                let (line, col) = self.here();
                let target = self.lvalue()?;
                let sig = &self.ir.signals[target.signal().0];
                if sig.kind == SignalKind::Reg {
                    return Err(HdlError::InvalidTarget {
                        name: sig.name.clone(),
                        line,
                        col,
                        reason: "continuous assignment to a reg".into(),
                    });
                }
                self.expect_sym("=")?;
                let value = self.expr()?;
                self.ir.assigns.push(ContAssign { target, value, line });
                if !self.eat_sym(",") {
                    break;
                }
            }
            return self.expect_sym(";");
        }
        if self.is_kw("always") {
            return self.always();
        }
        if let (Tok::Ident(_), Tok::Ident(_)) = (self.peek(), self.peek_at(1)) {
            return Err(self.unsupported("module instance"));
        }
        Err(self.syntax())
    }

    fn param_assignment(&mut self) -> PResult<()> {
        self.check_unsupported_keyword()?;
        let declared = if self.is_sym("[") {
            Some(self.opt_range()?.0)
        } else {
            None
        };
        let (line, col) = self.here();
        let name = self.ident()?;
        self.expect_sym("=")?;
        let e = self.expr()?;
        let value = self.fold(&e)?;
        let width = declared.unwrap_or_else(|| e.width(&self.ir));
        if self.names.contains_key(&name) {
            return Err(HdlError::Redeclared { name, line, col });
        }
        self.names.insert(name.clone(), Name::Param(self.ir.params.len()));
        self.ir.params.push(Param {
            name,
            value: value & mask(width),
            width,
        });
        Ok(())
    }

    fn always(&mut self) -> PResult<()> {
        let line = self.toks[self.pos].line;
        self.expect_kw("always")?;
        self.expect_sym("@")?;
        if self.is_sym("*") {
            return Err(self.unsupported("combinational always"));
        }
        self.expect_sym("(")?;
        let mut edges: Vec<(bool, SignalId)> = Vec::new();
        loop {
            let rising = if self.eat_kw("posedge") {
                true
            } else if self.eat_kw("negedge") {
                false
            } else {
                return Err(self.unsupported("combinational always"));
            };
            let (l, c) = self.here();
            let name = self.ident()?;
            let id = self.signal_ref(&name, l, c)?;
            if self.ir.signals[id.0].width != 1 {
                return Err(self.unsupported("multi-bit edge expression"));
            }
            edges.push((rising, id));
            if !(self.eat_kw("or") || self.eat_sym(",")) {
                break;
            }
        }
        self.expect_sym(")")?;
        if edges.len() > 2 {
            return Err(self.unsupported("more than one asynchronous control"));
        }
        let block = self.new_block(BlockKind::ProcessBody, line);
        let body = self.stmt_group()?;
        let body = Arm { block, body };

        let (clock, reset) = if edges.len() == 1 {
            (edges[0], None)
        } else {
            // the asynchronous control is the one tested by the leading `if`
            let tested = match body.body.first() {
                Some(Stmt::If { cond, .. }) => {
                    let mut reads = Vec::new();
                    cond.expr.visit_signals(&mut |s| reads.push(s));
                    reads
                }
                _ => Vec::new(),
            };
            let ri = if tested.contains(&edges[0].1) && !tested.contains(&edges[1].1) {
                0
            } else {
                1
            };
            let r = edges[ri];
            (
                edges[1 - ri],
                Some(ResetSpec {
                    signal: r.1,
                    active_high: r.0,
                }),
            )
        };
        if !clock.0 {
            return Err(HdlError::Unsupported {
                construct: "negedge clock".into(),
                line,
                col: 1,
            });
        }
        self.ir.processes.push(Process {
            clock: clock.1,
            reset,
            body,
            line,
        });
        Ok(())
    }

    fn new_block(&mut self, kind: BlockKind, line: u32) -> usize {
        self.ir.blocks.push(BlockInfo { kind, line });
        self.ir.blocks.len() - 1
    }

    /// One statement, with `begin ... end` flattened into a list.
    fn stmt_group(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        self.stmt_into(&mut out)?;
        Ok(out)
    }

    fn stmt_into(&mut self, out: &mut Vec<Stmt>) -> PResult<()> {
        self.check_unsupported_keyword()?;
        if self.eat_sym(";") {
            return Ok(());
        }
        if self.eat_kw("begin") {
            if self.eat_sym(":") {
                self.ident()?;
            }
            while !self.is_kw("end") {
                if matches!(self.peek(), Tok::Eof) {
                    return Err(self.syntax());
                }
                self.stmt_into(out)?;
            }
            self.advance();
            return Ok(());
        }
        if self.is_kw("if") {
            let line = self.toks[self.pos].line;
            self.advance();
            self.expect_sym("(")?;
            let cond = self.condition(SiteOrigin::If)?;
            self.expect_sym(")")?;
            let tb = self.new_block(BlockKind::IfThen, line);
            let then = Arm {
                block: tb,
                body: self.stmt_group()?,
            };
            let otherwise = if self.is_kw("else") {
                let eline = self.toks[self.pos].line;
                self.advance();
                let eb = self.new_block(BlockKind::IfElse, eline);
                Some(Arm {
                    block: eb,
                    body: self.stmt_group()?,
                })
            } else {
                None
            };
            out.push(Stmt::If { cond, then, otherwise });
            return Ok(());
        }
        if self.is_kw("case") {
            self.advance();
            self.expect_sym("(")?;
            let subject = self.expr()?;
            self.expect_sym(")")?;
            let mut items = Vec::new();
            let mut default = None;
            while !self.is_kw("endcase") {
                let (line, col) = self.here();
                if self.eat_kw("default") {
                    self.eat_sym(":");
                    if default.is_some() {
                        return Err(self.syntax());
                    }
                    let b = self.new_block(BlockKind::CaseDefault, line);
                    default = Some(Arm {
                        block: b,
                        body: self.stmt_group()?,
                    });
                    continue;
                }
                if matches!(self.peek(), Tok::Eof) {
                    return Err(self.syntax());
                }
                let mut labels = vec![self.expr()?];
                while self.eat_sym(",") {
                    labels.push(self.expr()?);
                }
                self.expect_sym(":")?;
                let mut m: Option<Expr> = None;
                for l in &labels {
                    let eq = Expr::Binary {
                        op: BinaryOp::Eq,
                        lhs: Box::new(subject.clone()),
                        rhs: Box::new(l.clone()),
                    };
                    m = Some(match m {
                        None => eq,
                        Some(prev) => Expr::Binary {
                            op: BinaryOp::LogicalOr,
                            lhs: Box::new(prev),
                            rhs: Box::new(eq),
                        },
                    });
                }
                let site = self.ir.cond_sites.len();
                self.ir.cond_sites.push(CondSite {
                    expr: m.expect("at least one label"),
                    origin: SiteOrigin::Case,
                    line,
                    col,
                });
                let b = self.new_block(BlockKind::CaseItem, line);
                let arm = Arm {
                    block: b,
                    body: self.stmt_group()?,
                };
                items.push(CaseItem { labels, site, arm });
            }
            self.advance();
            out.push(Stmt::Case { subject, items, default });
            return Ok(());
        }
        let (line, col) = self.here();
        let target = self.lvalue()?;
        let sig = &self.ir.signals[target.signal().0];
        if sig.kind != SignalKind::Reg {
            return Err(HdlError::InvalidTarget {
                name: sig.name.clone(),
                line,
                col,
                reason: "procedural assignment to a wire".into(),
            });
        }
        let blocking = if self.eat_sym("=") {
            true
        } else if self.eat_sym("<=") {
            false
        } else {
            return Err(self.syntax());
        };
        if self.is_sym("#") {
            return Err(self.unsupported("delay control"));
        }
        let value = self.expr()?;
        self.expect_sym(";")?;
        out.push(Stmt::Assign { target, value, blocking });
        Ok(())
    }

    fn condition(&mut self, origin: SiteOrigin) -> PResult<Condition> {
        let (line, col) = self.here();
        let expr = self.expr()?;
        Ok(self.make_condition(expr, origin, line, col))
    }

    fn make_condition(&mut self, expr: Expr, origin: SiteOrigin, line: u32, col: u32) -> Condition {
        let mut leaves = Vec::new();
        collect_leaves(&expr, &mut leaves);
        let mut sites = Vec::new();
        for leaf in leaves {
            sites.push(self.ir.cond_sites.len());
            self.ir.cond_sites.push(CondSite {
                expr: leaf.clone(),
                origin,
                line,
                col,
            });
        }
        Condition {
            expr: Box::new(expr),
            sites,
        }
    }

    fn signal_ref(&self, name: &str, line: u32, col: u32) -> PResult<SignalId> {
        match self.names.get(name) {
            Some(Name::Signal(id)) => Ok(*id),
            _ => Err(HdlError::UndeclaredSignal {
                name: name.to_string(),
                line,
                col,
            }),
        }
    }

    fn lvalue(&mut self) -> PResult<LValue> {
        if self.is_sym("{") {
            return Err(self.unsupported("concatenation target"));
        }
        let (line, col) = self.here();
        let name = match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => s.clone(),
            _ => return Err(self.syntax()),
        };
        self.advance();
        let id = self.signal_ref(&name, line, col)?;
        if !self.is_sym("[") {
            if self.ir.signals[id.0].array.is_some() {
                return Err(self.unsupported("whole-memory assignment"));
            }
            return Ok(LValue::Whole(id));
        }
        match self.select(id)? {
            Expr::Element { signal, index } => Ok(LValue::Element { signal, index: *index }),
            Expr::Bit { signal, index } => Ok(LValue::Bit { signal, index: *index }),
            Expr::Slice { signal, msb, lsb } => Ok(LValue::Slice { signal, msb, lsb }),
            _ => unreachable!("select returns a selection"),
        }
    }

    /// Parses `[...]` after a signal name.
    fn select(&mut self, id: SignalId) -> PResult<Expr> {
        self.expect_sym("[")?;
        let first = self.expr()?;
        let sig = self.ir.signals[id.0].clone();
        if sig.array.is_some() {
            self.expect_sym("]")?;
            if self.is_sym("[") {
                return Err(self.unsupported("bit select of a memory word"));
            }
            return Ok(Expr::Element {
                signal: id,
                index: Box::new(first),
            });
        }
        if self.eat_sym(":") {
            let msb = self.fold(&first)? as i64 - sig.lsb;
            let e2 = self.expr()?;
            let lsb = self.fold(&e2)? as i64 - sig.lsb;
            self.expect_sym("]")?;
            if lsb < 0 || msb < lsb || msb >= sig.width as i64 {
                return Err(self.unsupported("part select outside declared range"));
            }
            return Ok(Expr::Slice {
                signal: id,
                msb: msb as u32,
                lsb: lsb as u32,
            });
        }
        self.expect_sym("]")?;
        if is_const(&first) {
            let i = self.fold(&first)? as i64 - sig.lsb;
            if i < 0 || i >= sig.width as i64 {
                return Err(self.unsupported("bit select outside declared range"));
            }
            return Ok(Expr::Slice {
                signal: id,
                msb: i as u32,
                lsb: i as u32,
            });
        }
        Ok(Expr::Bit {
            signal: id,
            index: Box::new(first),
        })
    }

    // ---- expressions ----

    fn const_expr(&mut self) -> PResult<u64> {
        let e = self.expr()?;
        self.fold(&e)
    }

    fn fold(&self, e: &Expr) -> PResult<u64> {
        fold_const(e, &self.ir).ok_or_else(|| self.unsupported("non-constant expression"))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let (line, col) = self.here();
        let c = self.binary(0)?;
        if self.eat_sym("?") {
            let then = self.expr()?;
            self.expect_sym(":")?;
            let otherwise = self.expr()?;
            let cond = self.make_condition(c, SiteOrigin::Ternary, line, col);
            return Ok(Expr::Ternary {
                cond,
                then: Box::new(then),
                otherwise: Box::new(otherwise),
            });
        }
        Ok(c)
    }

    fn binop_at(&self, level: usize) -> Option<BinaryOp> {
        let s = match self.peek() {
            Tok::Sym(s) => *s,
            _ => return None,
        };
        use BinaryOp::*;
        let op = match (level, s) {
            (0, "||") => LogicalOr,
            (1, "&&") => LogicalAnd,
            (2, "|") => Or,
            (3, "^") => Xor,
            (3, "^~") | (3, "~^") => Xnor,
            (4, "&") => And,
            (5, "==") => Eq,
            (5, "!=") => Ne,
            (6, "<") => Lt,
            (6, "<=") => Le,
            (6, ">") => Gt,
            (6, ">=") => Ge,
            (7, "<<") => Shl,
            (7, ">>") => Shr,
            (8, "+") => Add,
            (8, "-") => Sub,
            (9, "*") => Mul,
            (9, "/") => Div,
            (9, "%") => Mod,
            _ => return None,
        };
        Some(op)
    }

    fn binary(&mut self, level: usize) -> PResult<Expr> {
        if level > 9 {
            return self.unary();
        }
        if matches!(self.peek(), Tok::Sym("===") | Tok::Sym("!==") | Tok::Sym("<<<") | Tok::Sym(">>>")) {
            return Err(self.unsupported(&self.peek().describe()));
        }
        let mut lhs = self.binary(level + 1)?;
        while let Some(op) = self.binop_at(level) {
            self.advance();
            let rhs = self.binary(level + 1)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
            if matches!(self.peek(), Tok::Sym("===") | Tok::Sym("!==") | Tok::Sym("<<<") | Tok::Sym(">>>")) {
                return Err(self.unsupported(&self.peek().describe()));
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let op = match self.peek() {
            Tok::Sym("~") => Some(UnaryOp::Not),
            Tok::Sym("!") => Some(UnaryOp::LogicalNot),
            Tok::Sym("-") => Some(UnaryOp::Neg),
            Tok::Sym("+") => Some(UnaryOp::Plus),
            Tok::Sym("&") => Some(UnaryOp::RedAnd),
            Tok::Sym("|") => Some(UnaryOp::RedOr),
            Tok::Sym("^") => Some(UnaryOp::RedXor),
            Tok::Sym("~&") => Some(UnaryOp::RedNand),
            Tok::Sym("~|") => Some(UnaryOp::RedNor),
            Tok::Sym("~^") | Tok::Sym("^~") => Some(UnaryOp::RedXnor),
            _ => None,
        };
        if let Some(op) = op {
            self.advance();
            let arg = self.unary()?;
            return Ok(Expr::Unary { op, arg: Box::new(arg) });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Number { value, width } => {
                self.advance();
                Ok(Expr::Const {
                    value,
                    width: width.unwrap_or(32),
                })
            }
            Tok::System(s) => Err(self.unsupported(&format!("${s}"))),
            Tok::Sym("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym("{") => {
                self.advance();
                let first = self.expr()?;
                if self.is_sym("{") {
                    let count = self.fold(&first)?;
                    self.advance();
                    let inner = self.concat_tail()?;
                    self.expect_sym("}")?;
                    let w = inner.width(&self.ir) as u64;
                    if count == 0 || count * w > MAX_WIDTH as u64 {
                        return Err(self.unsupported("expression wider than 64 bits"));
                    }
                    return Ok(Expr::Repeat {
                        count: count as u32,
                        expr: Box::new(inner),
                    });
                }
                let mut parts = vec![first];
                while self.eat_sym(",") {
                    parts.push(self.expr()?);
                }
                self.expect_sym("}")?;
                let e = Expr::Concat(parts);
                if e.width(&self.ir) > MAX_WIDTH {
                    return Err(self.unsupported("expression wider than 64 bits"));
                }
                Ok(e)
            }
            Tok::Ident(name) if !is_keyword(&name) => {
                self.advance();
                if self.is_sym("(") {
                    return Err(self.unsupported("function call"));
                }
                match self.names.get(&name).copied() {
                    Some(Name::Param(p)) => Ok(Expr::Param(p)),
                    Some(Name::Signal(id)) => {
                        if self.is_sym("[") {
                            self.select(id)
                        } else if self.ir.signals[id.0].array.is_some() {
                            Err(self.unsupported("whole-memory reference"))
                        } else {
                            Ok(Expr::Signal(id))
                        }
                    }
                    None => Err(HdlError::UndeclaredSignal { name, line, col }),
                }
            }
            _ => Err(self.syntax()),
        }
    }

    /// Body of `{n{a, b}}` after the inner `{`.
    fn concat_tail(&mut self) -> PResult<Expr> {
        let mut parts = vec![self.expr()?];
        while self.eat_sym(",") {
            parts.push(self.expr()?);
        }
        self.expect_sym("}")?;
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::Concat(parts)
        })
    }
}

fn is_const(e: &Expr) -> bool {
    match e {
        Expr::Const { .. } | Expr::Param(_) => true,
        Expr::Unary { arg, .. } => is_const(arg),
        Expr::Binary { lhs, rhs, .. } => is_const(lhs) && is_const(rhs),
        _ => false,
    }
}

/// Folds constant arithmetic used in ranges and parameter values.
fn fold_const(e: &Expr, ir: &DesignIR) -> Option<u64> {
    Some(match e {
        Expr::Const { value, .. } => *value,
        Expr::Param(p) => ir.params[*p].value,
        Expr::Unary { op, arg } => {
            let v = fold_const(arg, ir)?;
            match op {
                UnaryOp::Neg => v.wrapping_neg(),
                UnaryOp::Plus => v,
                UnaryOp::Not => !v & mask(arg.width(ir)),
                UnaryOp::LogicalNot => (v == 0) as u64,
                _ => return None,
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            let (a, b) = (fold_const(lhs, ir)?, fold_const(rhs, ir)?);
            use BinaryOp::*;
            match op {
                Add => a.wrapping_add(b),
                Sub => a.wrapping_sub(b),
                Mul => a.wrapping_mul(b),
                Div => a.checked_div(b)?,
                Mod => a.checked_rem(b)?,
                Shl => a.checked_shl(b as u32).unwrap_or(0),
                Shr => a.checked_shr(b as u32).unwrap_or(0),
                And => a & b,
                Or => a | b,
                Xor => a ^ b,
                _ => return None,
            }
        }
        _ => return None,
    })
}

/// Leaf operands of a condition: everything below `&&`, `||` and `!`.
pub fn collect_leaves<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match e {
        Expr::Binary {
            op: BinaryOp::LogicalAnd | BinaryOp::LogicalOr,
            lhs,
            rhs,
        } => {
            collect_leaves(lhs, out);
            collect_leaves(rhs, out);
        }
        Expr::Unary {
            op: UnaryOp::LogicalNot,
            arg,
        } => collect_leaves(arg, out),
        other => out.push(other),
    }
}
