//! Stacked configurations on three-column boards.
//!
//! A configuration puts the black king in column `x`, `b` rows below the
//! top edge; the white king in column `y`, `a` rows below the black king;
//! and the rook in column `z`, `c` rows above the bottom edge, strictly
//! below the white king. White is to move. `f` is the number of White moves
//! to mate from such a position, and the claim table bounds it by
//! piecewise expressions in `a + b`.
//!
//! The bounds hold for *spaced* configurations, where at least one empty
//! row separates the rook from the white king (`n >= a + b + c + 3`). With
//! the rook directly under the king, its row is within reach of the black
//! king and `f` can exceed the bound; such tight configurations encode
//! legally but are reported separately.

use std::fmt;
use std::str::FromStr;

use crate::board::{Dims, Position, Side, Square};
use crate::error::{Error, Result};
use crate::tablebase::Tablebase;

/// Column triple `(x, y, z)`: black king, white king, rook.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Family {
    pub x: u8,
    pub y: u8,
    pub z: u8,
}

impl Family {
    pub fn new(x: u8, y: u8, z: u8) -> Family {
        assert!((1..=3).contains(&x) && (1..=3).contains(&y) && (1..=3).contains(&z));
        Family { x, y, z }
    }

    /// Column mirror `c -> 4 - c`.
    pub fn mirror(self) -> Family {
        Family {
            x: 4 - self.x,
            y: 4 - self.y,
            z: 4 - self.z,
        }
    }

    /// All 27 column triples in lexicographic order.
    pub fn all() -> impl Iterator<Item = Family> {
        (1..=3u8)
            .flat_map(|x| (1..=3u8).flat_map(move |y| (1..=3u8).map(move |z| Family { x, y, z })))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FamilyConfig {
    pub family: Family,
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

impl FamilyConfig {
    pub fn new(family: Family, a: u32, b: u32, c: u32) -> FamilyConfig {
        FamilyConfig { family, a, b, c }
    }

    pub fn mirror(self) -> FamilyConfig {
        FamilyConfig {
            family: self.family.mirror(),
            ..self
        }
    }

    /// At least one empty row between rook and white king on `3 x n`.
    pub fn is_spaced(&self, n: u32) -> bool {
        self.a + self.b + self.c + 3 <= n
    }

    /// Reads a White-to-move position on a 3-column board back into stacked
    /// form, if it is one.
    pub fn recognize(pos: &Position, dims: Dims) -> Option<FamilyConfig> {
        let wr = pos.wr?;
        if dims.m() != 3 || pos.stm != Side::White {
            return None;
        }
        let (bk, wk) = (pos.bk.row(), pos.wk.row());
        if bk < wk || wk <= wr.row() {
            return None;
        }
        Some(FamilyConfig {
            family: Family {
                x: pos.bk.col,
                y: pos.wk.col,
                z: wr.col,
            },
            a: bk - wk,
            b: dims.n() - bk,
            c: wr.row() - 1,
        })
    }
}

impl fmt::Display for FamilyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} a={} b={} c={}", self.family, self.a, self.b, self.c)
    }
}

/// Places `cfg` on a `3 x n` board with White to move.
pub fn encode_family(cfg: &FamilyConfig, n: u32) -> Result<Position> {
    let dims = Dims::new(3, n)?;
    let FamilyConfig { family, a, b, c } = *cfg;
    let overflow = || Error::Geometry(format!("{cfg} does not fit on 3x{n}"));
    let bk_row = n.checked_sub(b).filter(|&r| r >= 1).ok_or_else(overflow)?;
    let wk_row = bk_row
        .checked_sub(a)
        .filter(|&r| r >= 1)
        .ok_or_else(overflow)?;
    let wr_row = 1 + c;
    if wr_row >= wk_row {
        return Err(overflow());
    }
    let pos = Position::new(
        Square::new(family.y as u32, wk_row),
        Some(Square::new(family.z as u32, wr_row)),
        Square::new(family.x as u32, bk_row),
        Side::White,
    );
    if !pos.is_legal(dims) {
        return Err(Error::IllegalPosition(format!("{cfg} on 3x{n}")));
    }
    Ok(pos)
}

/// White moves to mate from the encoded configuration.
pub fn f(tb: &Tablebase, cfg: &FamilyConfig) -> Result<u32> {
    let dims = tb.dims();
    if dims.m() != 3 {
        return Err(Error::DimsMismatch {
            expected: "3xn".into(),
            found: dims.to_string(),
        });
    }
    let pos = encode_family(cfg, dims.n())?;
    tb.dtm_moves(&pos)?
        .ok_or_else(|| Error::NotWinning(format!("{cfg} is drawn on {dims}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Any,
    Even,
    Odd,
}

impl Parity {
    pub fn of(a: u32) -> Parity {
        if a.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn admits(self, a: u32) -> bool {
        match self {
            Parity::Any => true,
            Parity::Even => a.is_multiple_of(2),
            Parity::Odd => a % 2 == 1,
        }
    }
}

/// Applicability condition of a formula case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Guard {
    pub parity: Parity,
    pub min_a: u32,
    /// Set for single-value entries like `a=0`.
    pub max_a: Option<u32>,
    /// Set for exact `(a, b)` entries.
    pub b: Option<u32>,
}

impl Guard {
    pub fn from(parity: Parity, min_a: u32) -> Guard {
        Guard {
            parity,
            min_a,
            max_a: None,
            b: None,
        }
    }

    pub fn exact_a(a: u32) -> Guard {
        Guard {
            parity: Parity::Any,
            min_a: a,
            max_a: Some(a),
            b: None,
        }
    }

    pub fn matches(&self, a: u32, b: u32) -> bool {
        self.parity.admits(a)
            && a >= self.min_a
            && self.max_a.is_none_or(|m| a <= m)
            && self.b.is_none_or(|bb| bb == b)
    }

    /// True for open-ended `a >= threshold` guards.
    pub fn is_unbounded(&self) -> bool {
        self.max_a.is_none() && self.b.is_none()
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.max_a, self.b) {
            (Some(a), Some(b)) if a == self.min_a => write!(f, "a={a},b={b}"),
            (Some(a), None) if a == self.min_a => write!(f, "a={a}"),
            _ => {
                match self.parity {
                    Parity::Any => {}
                    Parity::Even => write!(f, "even ")?,
                    Parity::Odd => write!(f, "odd ")?,
                }
                write!(f, "a>={}", self.min_a)
            }
        }
    }
}

impl FromStr for Guard {
    type Err = Error;

    fn from_str(s: &str) -> Result<Guard> {
        let bad = || Error::Parse(format!("bad guard {s:?}"));
        let s = s.trim();
        let (parity, rest) = match s.split_once(' ') {
            Some(("even", r)) => (Parity::Even, r.trim()),
            Some(("odd", r)) => (Parity::Odd, r.trim()),
            Some(_) => return Err(bad()),
            None => (Parity::Any, s),
        };
        if let Some(t) = rest.strip_prefix("a>=") {
            return Ok(Guard::from(parity, t.parse().map_err(|_| bad())?));
        }
        let rest = rest.strip_prefix("a=").ok_or_else(bad)?;
        if parity != Parity::Any {
            return Err(bad());
        }
        match rest.split_once(",b=") {
            Some((a, b)) => {
                let a: u32 = a.parse().map_err(|_| bad())?;
                let b: u32 = b.parse().map_err(|_| bad())?;
                Ok(Guard {
                    b: Some(b),
                    ..Guard::exact_a(a)
                })
            }
            None => Ok(Guard::exact_a(rest.parse().map_err(|_| bad())?)),
        }
    }
}

/// Right-hand side of a formula case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Const(u32),
    /// `a + b + k`.
    SumPlus(i32),
}

impl Bound {
    pub fn eval(self, a: u32, b: u32) -> u32 {
        match self {
            Bound::Const(v) => v,
            Bound::SumPlus(k) => (a as i64 + b as i64 + k as i64).max(0) as u32,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Bound::Const(v) => write!(f, "{v}"),
            Bound::SumPlus(0) => write!(f, "a+b"),
            Bound::SumPlus(k) if k > 0 => write!(f, "a+b+{k}"),
            Bound::SumPlus(k) => write!(f, "a+b-{}", -k),
        }
    }
}

impl FromStr for Bound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Bound> {
        let bad = || Error::Parse(format!("bad bound {s:?}"));
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("a+b") {
            if rest.is_empty() {
                return Ok(Bound::SumPlus(0));
            }
            let k: i32 = match rest.strip_prefix('+') {
                Some(k) => k.parse().map_err(|_| bad())?,
                None => rest.parse().map_err(|_| bad())?,
            };
            return Ok(Bound::SumPlus(k));
        }
        s.parse().map(Bound::Const).map_err(|_| bad())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Case {
    pub guard: Guard,
    pub bound: Bound,
}

/// Piecewise bound for one family. The first matching case applies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    pub family: Family,
    pub cases: Vec<Case>,
}

impl Formula {
    pub fn eval(&self, a: u32, b: u32) -> Option<u32> {
        self.case_for(a, b).map(|c| c.bound.eval(a, b))
    }

    pub fn case_for(&self, a: u32, b: u32) -> Option<&Case> {
        self.cases.iter().find(|c| c.guard.matches(a, b))
    }

    /// Smallest `a` from which every open-ended case applies, counting
    /// only rows of the guard's parity.
    pub fn threshold(&self) -> u32 {
        self.cases
            .iter()
            .filter(|c| c.guard.is_unbounded())
            .map(|c| {
                (c.guard.min_a..)
                    .find(|&a| c.guard.parity.admits(a))
                    .unwrap_or(c.guard.min_a)
            })
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, case) in self.cases.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let Family { x, y, z } = self.family;
            write!(
                f,
                "{x} {y} {z} | {:<15} | {}",
                case.guard.to_string(),
                case.bound
            )?;
        }
        Ok(())
    }
}

/// The bound table, one [`Formula`] per family, in file order.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ClaimTable {
    pub formulas: Vec<Formula>,
}

const STANDARD_CLAIMS: &str = include_str!("claims.txt");

impl ClaimTable {
    /// The checked-in table for the three-column board.
    pub fn standard() -> ClaimTable {
        STANDARD_CLAIMS.parse().expect("claims.txt parses")
    }

    pub fn get(&self, family: Family) -> Option<&Formula> {
        self.formulas.iter().find(|f| f.family == family)
    }

    /// Formula for `family` or, failing that, for its column mirror.
    pub fn lookup(&self, family: Family) -> Option<&Formula> {
        self.get(family).or_else(|| self.get(family.mirror()))
    }

    pub fn families(&self) -> impl Iterator<Item = Family> + '_ {
        self.formulas.iter().map(|f| f.family)
    }

    pub fn case_count(&self) -> usize {
        self.formulas.iter().map(|f| f.cases.len()).sum()
    }
}

impl fmt::Display for ClaimTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for formula in &self.formulas {
            writeln!(f, "{formula}")?;
        }
        Ok(())
    }
}

impl FromStr for ClaimTable {
    type Err = Error;

    /// Lines of `x y z | guard | bound`; `#` starts a comment.
    fn from_str(s: &str) -> Result<ClaimTable> {
        let mut table = ClaimTable::default();
        for (lineno, line) in s.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("claims line {}: {what}", lineno + 1));
            let parts: Vec<&str> = line.split('|').map(str::trim).collect();
            let [cols, guard, bound] = parts[..] else {
                return Err(bad("expected three |-separated fields"));
            };
            let cols: Vec<u8> = cols
                .split_whitespace()
                .map(|t| t.parse::<u8>().ok().filter(|c| (1..=3).contains(c)))
                .collect::<Option<_>>()
                .ok_or_else(|| bad("columns must be 1..3"))?;
            let [x, y, z] = cols[..] else {
                return Err(bad("expected three columns"));
            };
            let family = Family::new(x, y, z);
            let case = Case {
                guard: guard.parse()?,
                bound: bound.parse()?,
            };
            match table.formulas.iter_mut().find(|f| f.family == family) {
                Some(formula) => formula.cases.push(case),
                None => table.formulas.push(Formula {
                    family,
                    cases: vec![case],
                }),
            }
        }
        Ok(table)
    }
}

/// The claimed bound for `cfg`, looking through the column mirror; `None`
/// when no guard matches.
pub fn claimed_bound(table: &ClaimTable, cfg: &FamilyConfig) -> Option<u32> {
    table.lookup(cfg.family)?.eval(cfg.a, cfg.b)
}

/// Spaced configurations of `family` that encode legally on `3 x n`, in
/// `(a, b, c)` order.
pub fn stacked_configs(family: Family, n: u32) -> impl Iterator<Item = FamilyConfig> {
    legal_configs(family, n).filter(move |cfg| cfg.is_spaced(n))
}

/// Every configuration of `family` that encodes legally on `3 x n`, tight
/// ones included, in `(a, b, c)` order.
pub fn legal_configs(family: Family, n: u32) -> impl Iterator<Item = FamilyConfig> {
    (0..n).flat_map(move |a| {
        (0..n).flat_map(move |b| {
            (0..n).filter_map(move |c| {
                let cfg = FamilyConfig { family, a, b, c };
                encode_family(&cfg, n).ok().map(|_| cfg)
            })
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub cfg: FamilyConfig,
    /// `None` when the configuration is drawn.
    pub actual: Option<u32>,
    pub bound: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyStats {
    /// The table family (mirror configurations are folded in).
    pub family: Family,
    pub cells: usize,
    pub equal: usize,
    /// Configurations where `f` equals the bound.
    pub equality_cells: Vec<FamilyConfig>,
}

impl FamilyStats {
    pub fn attained(&self) -> bool {
        self.equal > 0
    }

    pub fn pointwise_sharp(&self) -> bool {
        self.cells > 0 && self.equal == self.cells
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClaimReport {
    pub n: u32,
    pub checked: usize,
    pub violations: Vec<Violation>,
    /// Legal configurations whose family (and mirror) has no formula.
    pub coverage_gaps: Vec<FamilyConfig>,
    /// Legal configurations below every guard of their formula.
    pub unguarded: Vec<FamilyConfig>,
    /// Families with no legal encoding at all on this board.
    pub inherently_illegal: Vec<Family>,
    pub families: Vec<FamilyStats>,
    /// Tight (rook directly below the king) configurations over their
    /// bound. Informational: tight cells are outside the claims.
    pub tight_exceedances: Vec<Violation>,
}

impl ClaimReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.coverage_gaps.is_empty()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out += &format!(
            "claim sweep on 3x{}: {} configurations checked\n",
            self.n, self.checked
        );
        for s in &self.families {
            let sharp = if s.pointwise_sharp() {
                "equal everywhere"
            } else if s.attained() {
                "attained"
            } else {
                "NOT attained"
            };
            out += &format!(
                "  family {}: {} cells, {} at the bound ({sharp})\n",
                s.family, s.cells, s.equal
            );
        }
        if !self.inherently_illegal.is_empty() {
            let list: Vec<String> = self
                .inherently_illegal
                .iter()
                .map(|f| f.to_string())
                .collect();
            out += &format!("  inherently illegal: {}\n", list.join(" "));
        }
        for v in &self.violations {
            match v.actual {
                Some(f) => out += &format!("  VIOLATION {}: f = {f} > {}\n", v.cfg, v.bound),
                None => out += &format!("  VIOLATION {}: drawn, bound {}\n", v.cfg, v.bound),
            }
        }
        for g in &self.coverage_gaps {
            out += &format!("  GAP {g}: no formula for family or mirror\n");
        }
        if !self.tight_exceedances.is_empty() {
            out += &format!(
                "  note: {} tight configurations (rook directly below the king) exceed their bound\n",
                self.tight_exceedances.len()
            );
        }
        out += &format!(
            "  {} unguarded cells, {} violations, {} coverage gaps\n",
            self.unguarded.len(),
            self.violations.len(),
            self.coverage_gaps.len()
        );
        out
    }

    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        out += &format!("n={}\nchecked={}\n", self.n, self.checked);
        out += &format!("violations={}\n", self.violations.len());
        out += &format!("coverage_gaps={}\n", self.coverage_gaps.len());
        out += &format!("unguarded={}\n", self.unguarded.len());
        out += &format!("tight_exceedances={}\n", self.tight_exceedances.len());
        for s in &self.families {
            let Family { x, y, z } = s.family;
            out += &format!(
                "family.{x}{y}{z}.cells={}\nfamily.{x}{y}{z}.equal={}\nfamily.{x}{y}{z}.attained={}\n",
                s.cells,
                s.equal,
                s.attained()
            );
        }
        for fam in &self.inherently_illegal {
            out += &format!("inherently_illegal={}{}{}\n", fam.x, fam.y, fam.z);
        }
        out += &format!("clean={}\n", self.is_clean());
        out
    }
}

/// Checks `f <= bound` for every spaced configuration on the tablebase's
/// `3 x n` board.
pub fn verify_claims(tb: &Tablebase, table: &ClaimTable) -> Result<ClaimReport> {
    let dims = tb.dims();
    if dims.m() != 3 {
        return Err(Error::DimsMismatch {
            expected: "3xn".into(),
            found: dims.to_string(),
        });
    }
    let n = dims.n();
    let mut report = ClaimReport {
        n,
        checked: 0,
        violations: Vec::new(),
        coverage_gaps: Vec::new(),
        unguarded: Vec::new(),
        inherently_illegal: Vec::new(),
        families: table
            .families()
            .map(|family| FamilyStats {
                family,
                cells: 0,
                equal: 0,
                equality_cells: Vec::new(),
            })
            .collect(),
        tight_exceedances: Vec::new(),
    };
    for family in Family::all() {
        let mut any = false;
        for cfg in legal_configs(family, n) {
            any = true;
            if !cfg.is_spaced(n) {
                if let Some(bound) = claimed_bound(table, &cfg) {
                    let actual = tb.dtm_moves(&encode_family(&cfg, n)?)?;
                    if actual.is_none_or(|v| v > bound) {
                        report
                            .tight_exceedances
                            .push(Violation { cfg, actual, bound });
                    }
                }
                continue;
            }
            let Some(formula) = table.lookup(family) else {
                report.coverage_gaps.push(cfg);
                continue;
            };
            let Some(bound) = formula.eval(cfg.a, cfg.b) else {
                report.unguarded.push(cfg);
                continue;
            };
            report.checked += 1;
            let stats = report
                .families
                .iter_mut()
                .find(|s| s.family == formula.family)
                .expect("formula family has stats");
            stats.cells += 1;
            let actual = tb.dtm_moves(&encode_family(&cfg, n)?)?;
            match actual {
                Some(v) if v <= bound => {
                    if v == bound {
                        stats.equal += 1;
                        stats.equality_cells.push(cfg);
                    }
                }
                _ => report.violations.push(Violation { cfg, actual, bound }),
            }
        }
        if !any {
            report.inherently_illegal.push(family);
        }
    }
    Ok(report)
}

/// Pairs of spaced configurations differing only in `c` whose values
/// differ.
pub fn c_dependence(tb: &Tablebase) -> Result<Vec<(FamilyConfig, FamilyConfig)>> {
    let n = tb.dims().n();
    let mut out = Vec::new();
    for family in Family::all() {
        let mut prev: Option<(FamilyConfig, Option<u32>)> = None;
        for cfg in stacked_configs(family, n) {
            let v = tb.dtm_moves(&encode_family(&cfg, n)?)?;
            if let Some((p, pv)) = prev {
                if p.a == cfg.a && p.b == cfg.b && pv != v {
                    out.push((p, cfg));
                }
            }
            prev = Some((cfg, v));
        }
    }
    Ok(out)
}

/// Configurations whose value differs from that of their column mirror.
pub fn mirror_mismatches(tb: &Tablebase) -> Result<Vec<FamilyConfig>> {
    let n = tb.dims().n();
    let mut out = Vec::new();
    for family in Family::all() {
        for cfg in legal_configs(family, n) {
            let v = tb.dtm_moves(&encode_family(&cfg, n)?)?;
            let mirrored = encode_family(&cfg.mirror(), n)?;
            if tb.dtm_moves(&mirrored)? != v {
                out.push(cfg);
            }
        }
    }
    Ok(out)
}

/// Compares `f` across boards of different heights for every configuration
/// that is spaced on all of them.
pub fn height_mismatches(tables: &[&Tablebase]) -> Result<Vec<FamilyConfig>> {
    let mut out = Vec::new();
    let Some(shortest) = tables.iter().map(|t| t.dims().n()).min() else {
        return Ok(out);
    };
    for family in Family::all() {
        for cfg in stacked_configs(family, shortest) {
            let mut seen: Option<Option<u32>> = None;
            for tb in tables {
                let v = tb.dtm_moves(&encode_family(&cfg, tb.dims().n())?)?;
                match seen {
                    None => seen = Some(v),
                    Some(s) if s != v => {
                        out.push(cfg);
                        break;
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(out)
}

/// Winning White-to-move positions needing more than `bound` moves.
pub fn positions_exceeding(tb: &Tablebase, bound: u32) -> Vec<(Position, u32)> {
    tb.legal_positions()
        .filter(|(p, _)| p.stm == Side::White)
        .filter_map(|(p, v)| {
            let moves = crate::tablebase::plies_to_moves(v.plies()?, Side::White);
            (moves > bound).then_some((p, moves))
        })
        .collect()
}
