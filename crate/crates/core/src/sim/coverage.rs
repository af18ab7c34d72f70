//! Cumulative coverage counters and exact rational scores.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::hdl::FsmDescriptor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverageType {
    Block,
    Toggle,
    Fsm,
    Expression,
    Code,
}

impl CoverageType {
    pub const ALL: [CoverageType; 5] = [
        CoverageType::Block,
        CoverageType::Toggle,
        CoverageType::Fsm,
        CoverageType::Expression,
        CoverageType::Code,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CoverageType::Block => "block",
            CoverageType::Toggle => "toggle",
            CoverageType::Fsm => "fsm",
            CoverageType::Expression => "expression",
            CoverageType::Code => "code",
        }
    }
}

impl fmt::Display for CoverageType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoverageType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "block" => CoverageType::Block,
            "toggle" => CoverageType::Toggle,
            "fsm" => CoverageType::Fsm,
            "expression" | "expr" => CoverageType::Expression,
            "code" => CoverageType::Code,
            other => return Err(format!("unknown coverage type `{other}`")),
        })
    }
}

/// Coverage as an exact `covered / total` fraction. An empty category
/// (`total == 0`) is vacuously complete and compares equal to 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Score {
    pub covered: u64,
    pub total: u64,
}

impl Score {
    pub const FULL: Score = Score { covered: 1, total: 1 };

    pub fn new(covered: u64, total: u64) -> Self {
        debug_assert!(covered <= total);
        Self { covered, total }
    }

    fn normalized(&self) -> (u128, u128) {
        if self.total == 0 {
            (1, 1)
        } else {
            (self.covered as u128, self.total as u128)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn fraction(&self) -> f64 {
        let (c, t) = self.normalized();
        c as f64 / t as f64
    }

    pub fn percent(&self) -> f64 {
        self.fraction() * 100.0
    }

    pub fn is_full(&self) -> bool {
        let (c, t) = self.normalized();
        c == t
    }

    /// Percentage rendered with `places` decimals, rounded half up from the
    /// exact fraction.
    pub fn percent_string(&self, places: u32) -> String {
        let (c, t) = self.normalized();
        let scale = 10u128.pow(places);
        let scaled = (c * 100 * scale * 2 + t) / (2 * t);
        let int = scaled / scale;
        if places == 0 {
            return int.to_string();
        }
        format!("{}.{:0width$}", int, scaled % scale, width = places as usize)
    }

    /// Parses a non-negative decimal percentage such as `52.5` exactly.
    pub fn from_percent_str(s: &str) -> Option<Score> {
        let s = s.trim();
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 12 {
            return None;
        }
        let digits = format!("{int}{frac}");
        let numer: u64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
        let denom = 100u64.checked_mul(10u64.checked_pow(frac.len() as u32)?)?;
        if numer > denom {
            return None;
        }
        Some(Score::new(numer, denom))
    }
}

impl PartialEq for Score {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = self.normalized();
        let (c, d) = other.normalized();
        (a * d).cmp(&(c * b))
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}%", self.percent_string(2))
    }
}

/// One coverage item that became covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CoverItem {
    Block(usize),
    /// Toggle bit index; `rising` distinguishes the 0->1 item from 1->0.
    Toggle { bit: usize, rising: bool },
    FsmState { fsm: usize, state: usize },
    FsmArc { fsm: usize, arc: usize },
    Expr { site: usize, value: bool },
}

impl CoverItem {
    /// The scored category this item counts toward; FSM arcs are tracked
    /// but not part of any score.
    pub fn category(&self) -> Option<CoverageType> {
        match self {
            CoverItem::Block(_) => Some(CoverageType::Block),
            CoverItem::Toggle { .. } => Some(CoverageType::Toggle),
            CoverItem::FsmState { .. } => Some(CoverageType::Fsm),
            CoverItem::FsmArc { .. } => None,
            CoverItem::Expr { .. } => Some(CoverageType::Expression),
        }
    }

    pub fn counts_toward(&self, ty: CoverageType) -> bool {
        match (self.category(), ty) {
            (None, _) => false,
            (Some(_), CoverageType::Code) => true,
            (Some(c), t) => c == t,
        }
    }
}

/// Monotone coverage counters for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageDb {
    pub blocks: Vec<bool>,
    pub toggle_rose: Vec<bool>,
    pub toggle_fell: Vec<bool>,
    pub fsm_states: Vec<Vec<bool>>,
    pub fsm_arcs: Vec<Vec<bool>>,
    pub expr_true: Vec<bool>,
    pub expr_false: Vec<bool>,
    covered: [u64; 4],
    arcs_covered: u64,
}

impl CoverageDb {
    pub fn new(blocks: usize, toggle_bits: usize, fsms: &[FsmDescriptor], sites: usize) -> Self {
        Self {
            blocks: vec![false; blocks],
            toggle_rose: vec![false; toggle_bits],
            toggle_fell: vec![false; toggle_bits],
            fsm_states: fsms.iter().map(|f| vec![false; f.states.len()]).collect(),
            fsm_arcs: fsms.iter().map(|f| vec![false; f.transitions.len()]).collect(),
            expr_true: vec![false; sites],
            expr_false: vec![false; sites],
            covered: [0; 4],
            arcs_covered: 0,
        }
    }

    fn set(flag: &mut bool, counter: &mut u64, item: CoverItem, new: &mut Vec<CoverItem>) {
        if !*flag {
            *flag = true;
            *counter += 1;
            new.push(item);
        }
    }

    pub fn mark_block(&mut self, id: usize, new: &mut Vec<CoverItem>) {
        Self::set(&mut self.blocks[id], &mut self.covered[0], CoverItem::Block(id), new);
    }

    pub fn mark_toggle(&mut self, bit: usize, rising: bool, new: &mut Vec<CoverItem>) {
        let flag = if rising {
            &mut self.toggle_rose[bit]
        } else {
            &mut self.toggle_fell[bit]
        };
        Self::set(flag, &mut self.covered[1], CoverItem::Toggle { bit, rising }, new);
    }

    pub fn mark_state(&mut self, fsm: usize, state: usize, new: &mut Vec<CoverItem>) {
        Self::set(
            &mut self.fsm_states[fsm][state],
            &mut self.covered[2],
            CoverItem::FsmState { fsm, state },
            new,
        );
    }

    pub fn mark_arc(&mut self, fsm: usize, arc: usize, new: &mut Vec<CoverItem>) {
        Self::set(&mut self.fsm_arcs[fsm][arc], &mut self.arcs_covered, CoverItem::FsmArc { fsm, arc }, new);
    }

    pub fn mark_site(&mut self, site: usize, value: bool, new: &mut Vec<CoverItem>) {
        let flag = if value {
            &mut self.expr_true[site]
        } else {
            &mut self.expr_false[site]
        };
        Self::set(flag, &mut self.covered[3], CoverItem::Expr { site, value }, new);
    }

    fn totals(&self) -> [u64; 4] {
        [
            self.blocks.len() as u64,
            2 * self.toggle_rose.len() as u64,
            self.fsm_states.iter().map(|s| s.len() as u64).sum(),
            2 * self.expr_true.len() as u64,
        ]
    }

    pub fn score(&self, ty: CoverageType) -> Score {
        let totals = self.totals();
        let i = match ty {
            CoverageType::Block => 0,
            CoverageType::Toggle => 1,
            CoverageType::Fsm => 2,
            CoverageType::Expression => 3,
            CoverageType::Code => {
                // empty categories contribute nothing to either side
                let covered = self.covered.iter().sum();
                let total = totals.iter().sum();
                return Score::new(covered, total);
            }
        };
        Score::new(self.covered[i], totals[i])
    }

    /// Fraction of FSM transition arcs taken (reported, not scored).
    pub fn fsm_arc_score(&self) -> Score {
        Score::new(self.arcs_covered, self.fsm_arcs.iter().map(|a| a.len() as u64).sum())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageSnapshot {
    pub cycle: u64,
    pub block: Score,
    pub toggle: Score,
    pub fsm: Score,
    pub expr: Score,
    pub code: Score,
    pub new_items: Vec<CoverItem>,
}

impl CoverageSnapshot {
    pub fn from_db(cycle: u64, db: &CoverageDb, new_items: Vec<CoverItem>) -> Self {
        Self {
            cycle,
            block: db.score(CoverageType::Block),
            toggle: db.score(CoverageType::Toggle),
            fsm: db.score(CoverageType::Fsm),
            expr: db.score(CoverageType::Expression),
            code: db.score(CoverageType::Code),
            new_items,
        }
    }

    pub fn score(&self, ty: CoverageType) -> Score {
        match ty {
            CoverageType::Block => self.block,
            CoverageType::Toggle => self.toggle,
            CoverageType::Fsm => self.fsm,
            CoverageType::Expression => self.expr,
            CoverageType::Code => self.code,
        }
    }

    pub fn newly_covered(&self, ty: CoverageType) -> usize {
        self.new_items.iter().filter(|i| i.counts_toward(ty)).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_scores_full() {
        let db = CoverageDb::new(0, 0, &[], 0);
        for ty in CoverageType::ALL {
            assert!(db.score(ty).is_full());
            assert_eq!(db.score(ty).percent_string(6), "100.000000");
        }
    }

    #[test]
    fn aggregate_skips_empty_categories() {
        let mut db = CoverageDb::new(2, 1, &[], 0);
        let mut new = Vec::new();
        db.mark_block(0, &mut new);
        // 1 of 2 blocks + 0 of 2 toggle items, no fsm/expr
        assert_eq!(db.score(CoverageType::Code), Score::new(1, 4));
        assert!(db.score(CoverageType::Fsm).is_full());
        db.mark_block(0, &mut new);
        assert_eq!(new.len(), 1);
    }

    #[test]
    fn percent_rendering_rounds_half_up() {
        assert_eq!(Score::new(1, 3).percent_string(6), "33.333333");
        assert_eq!(Score::new(2, 3).percent_string(6), "66.666667");
        assert_eq!(Score::new(0, 7).percent_string(6), "0.000000");
        assert_eq!(Score::new(1, 8).percent_string(2), "12.50");
        assert_eq!(Score::new(9, 10).percent_string(0), "90");
    }

    #[test]
    fn percent_strings_parse_exactly() {
        assert_eq!(Score::from_percent_str("52.5"), Some(Score::new(525, 1000)));
        assert_eq!(Score::from_percent_str("100"), Some(Score::FULL));
        assert_eq!(Score::from_percent_str("0.000000"), Some(Score::new(0, 1)));
        assert_eq!(Score::from_percent_str("100.5"), None);
        assert_eq!(Score::from_percent_str("-1"), None);
        assert_eq!(Score::from_percent_str("abc"), None);
    }

    proptest! {
        #[test]
        fn render_then_parse_is_within_rounding(c in 0u64..1000, extra in 1u64..1000) {
            let s = Score::new(c, c + extra);
            let back = Score::from_percent_str(&s.percent_string(6)).unwrap();
            prop_assert!((back.fraction() - s.fraction()).abs() <= 5e-9);
        }

        #[test]
        fn ordering_matches_cross_multiplication(a in 0u64..50, b in 1u64..50, c in 0u64..50, d in 1u64..50) {
            let (a, c) = (a.min(b), c.min(d));
            let x = Score::new(a, b);
            let y = Score::new(c, d);
            prop_assert_eq!(x.cmp(&y), (a * d).cmp(&(c * b)));
        }
    }
}
