//! From tablebase data to certified formulas on three-column boards.
//!
//! [`fit_formula`] reads the residual `f - (a + b)` off a built tablebase
//! and turns it into a parity-split formula. [`prove`] then checks a claim
//! table in three parts:
//!
//! 1. **Base case**: `f <= bound` straight from the tablebase for every
//!    guarded cell with `a + b <= 3`.
//! 2. **Inductive step**: for every other cell of a finite window there is
//!    a White move after which every Black reply lands in a stacked
//!    configuration whose *formula* value is at most `bound - 1`. The cell
//!    coordinates are `(a, b, c, g)` where `g >= 1` is the number of empty
//!    rows between rook and white king; the board is exactly as tall as the
//!    configuration needs.
//! 3. **Stabilization**: cells are grouped into classes: each coordinate
//!    is either a small exact value or "in the tail" (`a >= a0` of a given
//!    parity, `b >= b0`, `c >= 1`, `g >= 2`). Within a class the chosen move
//!    and the multiset of `(successor family, case, da, db)` must be
//!    identical. On a fixed-width board move geometry is translation
//!    invariant along each tail, and the formulas are affine in `a + b`, so
//!    one certified signature per class covers every cell of the class,
//!    including those beyond the window.
//!
//! Every certified step lowers the claimed bound by at least one, so
//! induction on the bound value is well founded and the three parts
//! together establish the table for all `a, b, c` and all board heights.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::board::{Dims, Move, Piece, Position, TerminalKind};
use crate::error::{Error, Result};
use crate::family::{
    encode_family, stacked_configs, Bound, Case, ClaimTable, Family, FamilyConfig, Formula, Guard,
    Parity,
};
use crate::tablebase::Tablebase;

/// Minimum number of rows per parity the fit needs to call a residual
/// stable.
const FIT_SUPPORT: usize = 3;

/// Fits a parity-split formula for `family` from a `3 x n` tablebase.
///
/// For each parity of `a` the residual `r(a, b) = f - (a + b)` is
/// maximised over `b` and `c` per row. The residual of the highest rows is
/// the stable constant; the threshold is the lowest row from which no row
/// exceeds it. Rows below the threshold become single-row entries, as a
/// constant when `f` does not vary along the row; so do the lowest rows
/// whenever `f` is constant on them. Both parities collapse into one case
/// when they agree.
pub fn fit_formula(tb: &Tablebase, family: Family) -> Result<Formula> {
    let dims = tb.dims();
    if dims.m() != 3 {
        return Err(Error::DimsMismatch {
            expected: "3xn".into(),
            found: dims.to_string(),
        });
    }
    let n = dims.n();
    // row a -> (max residual, min f, max f, cells)
    let mut rows: BTreeMap<u32, (i64, u32, u32, usize)> = BTreeMap::new();
    for cfg in stacked_configs(family, n) {
        let pos = encode_family(&cfg, n)?;
        let f = tb
            .dtm_moves(&pos)?
            .ok_or_else(|| Error::Fit(format!("{cfg} is drawn on {dims}")))?;
        let r = f as i64 - (cfg.a + cfg.b) as i64;
        let e = rows.entry(cfg.a).or_insert((r, f, f, 0));
        e.0 = e.0.max(r);
        e.1 = e.1.min(f);
        e.2 = e.2.max(f);
        e.3 += 1;
    }
    if rows.is_empty() {
        return Err(Error::Fit(format!(
            "family {family} has no legal cells on {dims}"
        )));
    }

    let mut special = Vec::new();
    // Lowest rows on which f does not grow with b at all.
    while let Some((&a, &(_, lo, hi, cells))) = rows.first_key_value() {
        if lo != hi || cells < FIT_SUPPORT {
            break;
        }
        special.push(Case {
            guard: Guard::exact_a(a),
            bound: Bound::Const(lo),
        });
        rows.remove(&a);
    }
    let mut tails = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        let own: Vec<(u32, i64)> = rows
            .iter()
            .filter(|(a, _)| Parity::of(**a) == parity)
            .map(|(a, r)| (*a, r.0))
            .collect();
        if own.len() < FIT_SUPPORT {
            return Err(Error::Fit(format!(
                "family {family}: only {} rows of {parity:?} a on {dims}",
                own.len()
            )));
        }
        let stable = own[own.len() - 1].1;
        if own[own.len() - 2].1 != stable {
            return Err(Error::Fit(format!(
                "family {family}: residual of {parity:?} a does not settle ({} vs {stable})",
                own[own.len() - 2].1
            )));
        }
        let cut = own
            .iter()
            .rposition(|&(_, r)| r > stable)
            .map_or(0, |i| i + 1);
        let threshold = own[cut].0;
        if own.len() - cut < 2 {
            return Err(Error::Fit(format!(
                "family {family}: {parity:?} threshold too close to the board edge"
            )));
        }
        for &(a, _) in &own[..cut] {
            let (r, lo, hi, _) = rows[&a];
            let bound = if lo == hi {
                Bound::Const(lo)
            } else {
                Bound::SumPlus(r as i32)
            };
            special.push(Case {
                guard: Guard::exact_a(a),
                bound,
            });
        }
        tails.push((parity, threshold, stable));
    }

    special.sort_by_key(|c| c.guard.min_a);
    let mut cases = special;
    let (even, odd) = (tails[0], tails[1]);
    if even.2 == odd.2 && even.1.abs_diff(odd.1) == 1 {
        cases.push(Case {
            guard: Guard::from(Parity::Any, even.1.min(odd.1)),
            bound: Bound::SumPlus(even.2 as i32),
        });
    } else {
        for (parity, threshold, stable) in [even, odd] {
            cases.push(Case {
                guard: Guard::from(parity, threshold),
                bound: Bound::SumPlus(stable as i32),
            });
        }
    }
    Ok(Formula { family, cases })
}

/// Fits every family in `families` against one tablebase.
pub fn fit_table(tb: &Tablebase, families: impl IntoIterator<Item = Family>) -> Result<ClaimTable> {
    let formulas = families
        .into_iter()
        .map(|f| fit_formula(tb, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClaimTable { formulas })
}

/// True when the two formulas give the same value (or both none) on every
/// cell with `a, b < span`.
pub fn formulas_agree(lhs: &Formula, rhs: &Formula, span: u32) -> bool {
    (0..span).all(|a| (0..span).all(|b| lhs.eval(a, b) == rhs.eval(a, b)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseFailure {
    pub cfg: FamilyConfig,
    pub actual: Option<u32>,
    pub bound: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BaseReport {
    pub n: u32,
    pub checked: usize,
    pub equal: usize,
    pub failures: Vec<BaseFailure>,
    /// Guarded `(family, a, b)` cells with no spaced placement on the board.
    pub out_of_window: Vec<(Family, u32, u32)>,
}

impl BaseReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `f <= formula` on the tablebase for every guarded cell with
/// `a + b <= 3`, over all spaced placements of the rook.
pub fn base_case_check(formulas: &ClaimTable, tb: &Tablebase) -> Result<BaseReport> {
    let dims = tb.dims();
    if dims.m() != 3 {
        return Err(Error::DimsMismatch {
            expected: "3xn".into(),
            found: dims.to_string(),
        });
    }
    let n = dims.n();
    let mut report = BaseReport {
        n,
        ..BaseReport::default()
    };
    for formula in &formulas.formulas {
        for a in 0..=3u32 {
            for b in 0..=3 - a {
                let Some(bound) = formula.eval(a, b) else {
                    continue;
                };
                let probe = FamilyConfig::new(formula.family, a, b, 0);
                // Kings too close: not a position at all.
                if matches!(
                    encode_family(&probe, a + b + 3),
                    Err(Error::IllegalPosition(_))
                ) {
                    continue;
                }
                let mut placed = false;
                for c in 0..n {
                    let cfg = FamilyConfig::new(formula.family, a, b, c);
                    if !cfg.is_spaced(n) {
                        break;
                    }
                    let pos = encode_family(&cfg, n)?;
                    placed = true;
                    report.checked += 1;
                    let actual = tb.dtm_moves(&pos)?;
                    match actual {
                        Some(v) if v <= bound => report.equal += usize::from(v == bound),
                        _ => report.failures.push(BaseFailure { cfg, actual, bound }),
                    }
                }
                if !placed {
                    report.out_of_window.push((formula.family, a, b));
                }
            }
        }
    }
    Ok(report)
}

/// Region of `(a, b)` cells sampled by the step check: tails start at
/// `a0` and `b0` and extend `side` further.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub a0: u32,
    pub b0: u32,
    pub side: u32,
}

impl Default for Window {
    fn default() -> Window {
        Window {
            a0: 4,
            b0: 2,
            side: 4,
        }
    }
}

/// Smallest tail that counts as evidence of stabilization.
pub const MIN_WINDOW_SIDE: u32 = 4;

/// Tail starts and sampled extents for the rook coordinates.
const C_TAIL: u32 = 1;
const G_TAIL: u32 = 2;
const RCOORD_SPAN: u32 = 3;

/// Cell coordinates: `g` empty rows between rook and white king.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub g: u32,
}

impl Cell {
    pub fn height(&self) -> u32 {
        self.a + self.b + self.c + self.g + 2
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a={} b={} c={} g={}", self.a, self.b, self.c, self.g)
    }
}

/// Relative description of a White move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MoveKind {
    pub piece: Piece,
    pub dcol: i32,
    pub drow: i32,
}

impl MoveKind {
    /// Candidate order for certification: king before rook, then column
    /// step, then shortest vertical step. Being relative, the order is the
    /// same at translated cells.
    pub fn order_key(&self) -> (Piece, i32, u32, i32) {
        (self.piece, self.dcol, self.drow.unsigned_abs(), self.drow)
    }
}

fn move_kind(mv: &Move) -> MoveKind {
    MoveKind {
        piece: mv.piece,
        dcol: mv.to.col() as i32 - mv.from.col() as i32,
        drow: mv.to.row() as i32 - mv.from.row() as i32,
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.piece {
            Piece::King => "king",
            Piece::Rook => "rook",
        };
        write!(f, "{p}{:+},{:+}", self.dcol, self.drow)
    }
}

/// Where one Black reply leads, relative to the cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Successor {
    /// The claim-table family (mirrors folded in).
    pub family: Family,
    /// Index of the case that bounds the successor.
    pub case: usize,
    pub da: i32,
    pub db: i32,
}

impl fmt::Display for Successor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}#{} {:+},{:+}",
            self.family, self.case, self.da, self.db
        )
    }
}

/// What one Black reply leads to: a bounded stacked configuration, or a
/// further White step when the reply leaves the stacked form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reply {
    Stacked(Successor),
    Deeper(Box<Signature>),
}

impl fmt::Display for Reply {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reply::Stacked(s) => s.fmt(f),
            Reply::Deeper(sig) => write!(f, "[{sig}]"),
        }
    }
}

/// Abstract shape of a certified step.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub mv: MoveKind,
    /// Sorted; empty when the move mates.
    pub replies: Vec<Reply>,
}

impl Signature {
    /// White moves along the longest branch.
    pub fn depth(&self) -> u32 {
        1 + self
            .replies
            .iter()
            .map(|r| match r {
                Reply::Stacked(_) => 0,
                Reply::Deeper(sig) => sig.depth(),
            })
            .max()
            .unwrap_or(0)
    }

    /// Successors reached directly by the first move.
    pub fn stacked(&self) -> Vec<Successor> {
        self.replies
            .iter()
            .filter_map(|r| match r {
                Reply::Stacked(s) => Some(*s),
                Reply::Deeper(_) => None,
            })
            .collect()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.replies.is_empty() {
            return write!(f, "{} mates", self.mv);
        }
        let replies: Vec<String> = self.replies.iter().map(|s| s.to_string()).collect();
        write!(f, "{} -> {{{}}}", self.mv, replies.join("; "))
    }
}

/// Tail-or-exact coordinate used to group cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    Exact(u32),
    Tail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassKey {
    pub family: Family,
    pub case: usize,
    pub parity: Parity,
    pub a: Coord,
    pub b: Coord,
    pub c: Coord,
    pub g: Coord,
}

impl ClassKey {
    /// The doubly infinite `a, b` tail with the rook coordinates in their
    /// tails too.
    pub fn is_interior(&self) -> bool {
        [self.a, self.b, self.c, self.g]
            .iter()
            .all(|c| *c == Coord::Tail)
    }
}

impl fmt::Display for ClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |c: Coord, tail: &str| match c {
            Coord::Exact(v) => v.to_string(),
            Coord::Tail => tail.to_string(),
        };
        write!(
            f,
            "{}#{} {:?} a={} b={} c={} g={}",
            self.family,
            self.case,
            self.parity,
            show(self.a, "tail"),
            show(self.b, "tail"),
            show(self.c, "tail"),
            show(self.g, "tail")
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepCell {
    pub family: Family,
    pub case: usize,
    pub cell: Cell,
    pub class: ClassKey,
    pub bound: u32,
    /// `None` when no White move certifies the cell.
    pub certificate: Option<(Signature, u32)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepReport {
    pub window: Window,
    pub cells: Vec<StepCell>,
    /// Formulas whose guards start too close to the window.
    pub threshold_errors: Vec<String>,
}

impl StepReport {
    pub fn failures(&self) -> impl Iterator<Item = &StepCell> {
        self.cells.iter().filter(|c| c.certificate.is_none())
    }

    pub fn ok(&self) -> bool {
        self.threshold_errors.is_empty() && self.failures().next().is_none()
    }

    /// First certificate recorded for each class.
    pub fn class_signatures(&self) -> BTreeMap<ClassKey, &Signature> {
        let mut out = BTreeMap::new();
        for cell in &self.cells {
            if let Some((sig, _)) = &cell.certificate {
                out.entry(cell.class).or_insert(sig);
            }
        }
        out
    }
}

fn class_of(family: Family, case: usize, cell: Cell, window: Window) -> ClassKey {
    let coord = |v: u32, tail: u32| {
        if v >= tail {
            Coord::Tail
        } else {
            Coord::Exact(v)
        }
    };
    ClassKey {
        family,
        case,
        parity: Parity::of(cell.a),
        a: coord(cell.a, window.a0),
        b: coord(cell.b, window.b0),
        c: coord(cell.c, C_TAIL),
        g: coord(cell.g, G_TAIL),
    }
}

/// White moves a single step may chain through positions that are not
/// spaced stacked configurations.
pub const MAX_LOOKAHEAD: u32 = 5;

/// Looks for the first White move (in [`MoveKind::order_key`] order) from
/// `cell` whose replies are all bounded by the formulas with a total of at
/// most `bound`. Deeper lookahead is tried only when no shallower
/// certificate exists.
pub fn certify_cell(
    formulas: &ClaimTable,
    family: Family,
    cell: Cell,
    bound: u32,
) -> Result<Option<(Signature, u32)>> {
    let mut search = Search::new(formulas, family, cell)?;
    let root = search.root;
    for depth in 1..=MAX_LOOKAHEAD {
        if let Some(found) = search.best(&root, depth, bound)? {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

/// Evaluates the candidate step `kind` at `cell` without lookahead.
pub fn evaluate_move(
    formulas: &ClaimTable,
    family: Family,
    cell: Cell,
    kind: MoveKind,
) -> Result<Option<(Signature, u32)>> {
    let mut search = Search::new(formulas, family, cell)?;
    let root = search.root;
    for mv in root.moves(search.dims)? {
        if move_kind(&mv) == kind {
            return search.step(&root, &mv, 1, u32::MAX);
        }
    }
    Ok(None)
}

type Found = Option<(Signature, u32)>;

/// Budgeted AND-OR search below one cell.
struct Search<'a> {
    formulas: &'a ClaimTable,
    dims: Dims,
    cell: Cell,
    root: Position,
    memo: HashMap<(Position, u32, u32), Found>,
    /// Largest budget known to fail per position and depth.
    failed: HashMap<(Position, u32), u32>,
}

impl<'a> Search<'a> {
    fn new(formulas: &'a ClaimTable, family: Family, cell: Cell) -> Result<Search<'a>> {
        let height = cell.height();
        let dims = Dims::new(3, height)?;
        let root = encode_family(&FamilyConfig::new(family, cell.a, cell.b, cell.c), height)?;
        Ok(Search {
            formulas,
            dims,
            cell,
            root,
            memo: HashMap::new(),
            failed: HashMap::new(),
        })
    }

    /// First White move whose total stays within `budget`.
    fn best(&mut self, pos: &Position, depth: u32, budget: u32) -> Result<Found> {
        if budget == 0
            || self
                .failed
                .get(&(*pos, depth))
                .is_some_and(|&b| b >= budget)
        {
            return Ok(None);
        }
        if let Some(hit) = self.memo.get(&(*pos, depth, budget)) {
            return Ok(hit.clone());
        }
        let mut moves = pos.moves(self.dims)?;
        moves.sort_by_key(|mv| move_kind(mv).order_key());
        let mut found = None;
        for mv in moves {
            found = self.step(pos, &mv, depth, budget)?;
            if found.is_some() {
                break;
            }
        }
        if found.is_none() {
            let worst = self.failed.entry((*pos, depth)).or_insert(0);
            *worst = (*worst).max(budget);
        }
        self.memo.insert((*pos, depth, budget), found.clone());
        Ok(found)
    }

    /// Every reply must be bounded by a formula, directly or within
    /// `depth - 1` further moves, with the total inside `budget`.
    fn step(&mut self, pos: &Position, mv: &Move, depth: u32, budget: u32) -> Result<Found> {
        let dims = self.dims;
        let kind = move_kind(mv);
        let after = pos.apply(mv, dims)?;
        match after.classify(dims)? {
            TerminalKind::Checkmate => {
                return Ok(Some((
                    Signature {
                        mv: kind,
                        replies: Vec::new(),
                    },
                    1,
                )))
            }
            TerminalKind::Ongoing => {}
            TerminalKind::Stalemate | TerminalKind::RookCaptured => return Ok(None),
        }
        let room = budget - 1;
        let mut replies = Vec::new();
        let mut worst = 0;
        for reply in after.moves(dims)? {
            if reply.captures_rook {
                return Ok(None);
            }
            let next = after.apply(&reply, dims)?;
            if let Some((succ, value)) = bounded_successor(self.formulas, &next, dims, self.cell) {
                if value > room {
                    return Ok(None);
                }
                worst = worst.max(value);
                replies.push(Reply::Stacked(succ));
            } else if depth > 1 {
                let Some((sig, value)) = self.best(&next, depth - 1, room)? else {
                    return Ok(None);
                };
                worst = worst.max(value);
                replies.push(Reply::Deeper(Box::new(sig)));
            } else {
                return Ok(None);
            }
        }
        replies.sort();
        Ok(Some((Signature { mv: kind, replies }, 1 + worst)))
    }
}

fn bounded_successor(
    formulas: &ClaimTable,
    pos: &Position,
    dims: Dims,
    cell: Cell,
) -> Option<(Successor, u32)> {
    let succ = FamilyConfig::recognize(pos, dims)?;
    if !succ.is_spaced(dims.n()) {
        return None;
    }
    let formula = formulas.lookup(succ.family)?;
    let case = formula
        .cases
        .iter()
        .position(|c| c.guard.matches(succ.a, succ.b))?;
    let value = formula.cases[case].bound.eval(succ.a, succ.b);
    let succ = Successor {
        family: formula.family,
        case,
        da: succ.a as i32 - cell.a as i32,
        db: succ.b as i32 - cell.b as i32,
    };
    Some((succ, value))
}

fn window_cells(case: &Case, window: Window) -> Vec<(u32, u32)> {
    let a_max = window.a0 + window.side;
    let b_max = window.b0 + window.side;
    let a_range: Vec<u32> = match case.guard.max_a {
        Some(a) => vec![a],
        None => (case.guard.min_a..=a_max).collect(),
    };
    let b_range: Vec<u32> = match case.guard.b {
        Some(b) => vec![b],
        None => (0..=b_max).collect(),
    };
    let mut out = Vec::new();
    for &a in &a_range {
        for &b in &b_range {
            if a + b > 3 && case.guard.matches(a, b) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Runs the inductive step over every cell of the window (all cases, all
/// families, `a + b > 3`).
pub fn induction_step_check(formulas: &ClaimTable, window: Window) -> Result<StepReport> {
    step_check(formulas, window, false)
}

fn step_check(formulas: &ClaimTable, window: Window, fail_fast: bool) -> Result<StepReport> {
    let mut report = StepReport {
        window,
        cells: Vec::new(),
        threshold_errors: Vec::new(),
    };
    for formula in &formulas.formulas {
        let threshold = formula.threshold();
        if window.a0 <= threshold {
            report.threshold_errors.push(format!(
                "family {}: window a0={} does not exceed the guard threshold {threshold}",
                formula.family, window.a0
            ));
        }
        for (case_idx, case) in formula.cases.iter().enumerate() {
            for (a, b) in window_cells(case, window) {
                for c in 0..C_TAIL + RCOORD_SPAN {
                    for g in 1..G_TAIL + RCOORD_SPAN {
                        let cell = Cell { a, b, c, g };
                        let cfg = FamilyConfig::new(formula.family, a, b, c);
                        if matches!(
                            encode_family(&cfg, cell.height()),
                            Err(Error::IllegalPosition(_))
                        ) {
                            continue;
                        }
                        let bound = case.bound.eval(a, b);
                        let certificate = certify_cell(formulas, formula.family, cell, bound)?;
                        let failed = certificate.is_none();
                        report.cells.push(StepCell {
                            family: formula.family,
                            case: case_idx,
                            cell,
                            class: class_of(formula.family, case_idx, cell, window),
                            bound,
                            certificate,
                        });
                        if failed && fail_fast {
                            return Ok(report);
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stabilization {
    pub ok: bool,
    /// Set when the window is too small to say anything.
    pub insufficient: bool,
    pub classes: usize,
    pub comparisons: usize,
    /// Cells whose signature differs from the first one of their class.
    pub mismatches: Vec<(ClassKey, Cell)>,
}

/// True iff each class of cells shares one certified signature. Rejects
/// windows smaller than [`MIN_WINDOW_SIDE`].
pub fn stabilization_check(step: &StepReport) -> Stabilization {
    if step.window.side < MIN_WINDOW_SIDE {
        return Stabilization {
            ok: false,
            insufficient: true,
            classes: 0,
            comparisons: 0,
            mismatches: Vec::new(),
        };
    }
    let mut first: BTreeMap<ClassKey, Option<&Signature>> = BTreeMap::new();
    let mut comparisons = 0;
    let mut mismatches = Vec::new();
    for cell in &step.cells {
        let sig = cell.certificate.as_ref().map(|(s, _)| s);
        match first.get(&cell.class) {
            None => {
                first.insert(cell.class, sig);
            }
            Some(&reference) => {
                comparisons += 1;
                if reference.is_none() || reference != sig {
                    mismatches.push((cell.class, cell.cell));
                }
            }
        }
    }
    let uncertified = step.cells.iter().any(|c| c.certificate.is_none());
    Stabilization {
        ok: mismatches.is_empty() && !uncertified,
        insufficient: false,
        classes: first.len(),
        comparisons,
        mismatches,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofReport {
    pub families: usize,
    pub cases: usize,
    pub base: BaseReport,
    pub step: StepReport,
    pub stabilization: Stabilization,
    pub certified: bool,
    /// No formulas: certified with nothing to prove.
    pub vacuous: bool,
}

impl ProofReport {
    pub fn base_ok(&self) -> bool {
        self.base.ok()
    }

    pub fn step_ok(&self) -> bool {
        self.step.ok()
    }

    pub fn stabilization_ok(&self) -> bool {
        self.stabilization.ok
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out += "Proof architecture: finite base case (tablebase, a+b <= 3), inductive step \
                checked on a window of cells against the formulas themselves, and signature \
                stabilization transferring each step to all larger a, b, c and board heights. \
                Induction runs on the claimed bound, which every certified step lowers.\n\n";
        out += &format!(
            "Base case (a+b <= 3, 3x{} tablebase): {} placements, {} at the bound, {}\n",
            self.base.n,
            self.base.checked,
            self.base.equal,
            if self.base_ok() { "ok" } else { "FAILED" }
        );
        for f in &self.base.failures {
            let actual = f.actual.map_or("draw".to_string(), |v| v.to_string());
            out += &format!(
                "  base failure {}: f = {actual}, claimed {}\n",
                f.cfg, f.bound
            );
        }
        for (fam, a, b) in &self.base.out_of_window {
            out += &format!("  out of window: {fam} a={a} b={b}\n");
        }
        let w = self.step.window;
        out += &format!(
            "\nInductive step (a0={}, b0={}, side={}): {} cells\n",
            w.a0,
            w.b0,
            w.side,
            self.step.cells.len()
        );
        for e in &self.step.threshold_errors {
            out += &format!("  {e}\n");
        }
        let sigs = self.step.class_signatures();
        for (key, sig) in sigs.iter().filter(|(k, _)| k.is_interior()) {
            out += &format!("  {}#{} a {:?}: {sig}\n", key.family, key.case, key.parity);
        }
        for cell in self.step.failures().take(20) {
            out += &format!(
                "  step failure {} {}: no certifying move (bound {})\n",
                cell.family, cell.cell, cell.bound
            );
        }
        out += &format!(
            "\nStabilization: {} classes, {} comparisons, {}\n",
            self.stabilization.classes,
            self.stabilization.comparisons,
            if self.stabilization.insufficient {
                "window too small"
            } else if self.stabilization_ok() {
                "ok"
            } else {
                "FAILED"
            }
        );
        for (key, cell) in self.stabilization.mismatches.iter().take(20) {
            out += &format!("  signature differs in class {key} at {cell}\n");
        }
        let verdict = match (self.certified, self.vacuous) {
            (true, true) => "certified (vacuous: no formulas)",
            (true, false) => "certified",
            _ => "not certified",
        };
        out += &format!(
            "\n{} families, {} cases: {verdict}\n",
            self.families, self.cases
        );
        out
    }

    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        out += &format!("families={}\ncases={}\n", self.families, self.cases);
        out += &format!(
            "base_ok={}\nbase_checked={}\n",
            self.base_ok(),
            self.base.checked
        );
        out += &format!(
            "step_ok={}\nstep_cells={}\n",
            self.step_ok(),
            self.step.cells.len()
        );
        out += &format!("step_failures={}\n", self.step.failures().count());
        out += &format!("stabilization_ok={}\n", self.stabilization_ok());
        out += &format!("classes={}\n", self.stabilization.classes);
        out += &format!("vacuous={}\ncertified={}\n", self.vacuous, self.certified);
        out
    }
}

/// Base case, inductive step and stabilization for a claim table.
pub fn prove(formulas: &ClaimTable, tb: &Tablebase, window: Window) -> Result<ProofReport> {
    let base = base_case_check(formulas, tb)?;
    let step = induction_step_check(formulas, window)?;
    let stabilization = stabilization_check(&step);
    let vacuous = formulas.formulas.is_empty();
    let certified = base.ok() && step.ok() && stabilization.ok;
    Ok(ProofReport {
        families: formulas.formulas.len(),
        cases: formulas.case_count(),
        base,
        step,
        stabilization,
        certified,
        vacuous,
    })
}

/// Certification verdict only, stopping at the first failure.
pub fn certifies(formulas: &ClaimTable, tb: &Tablebase, window: Window) -> Result<bool> {
    if !base_case_check(formulas, tb)?.ok() {
        return Ok(false);
    }
    let step = step_check(formulas, window, true)?;
    Ok(step.ok() && stabilization_check(&step).ok)
}

/// Copy of `table` with one case's constant lowered by one.
pub fn perturb(table: &ClaimTable, formula: usize, case: usize) -> ClaimTable {
    let mut out = table.clone();
    let bound = &mut out.formulas[formula].cases[case].bound;
    *bound = match *bound {
        Bound::Const(v) => Bound::Const(v.saturating_sub(1)),
        Bound::SumPlus(k) => Bound::SumPlus(k - 1),
    };
    out
}

/// Outcome of proving a table with one constant lowered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Perturbation {
    pub family: Family,
    pub case: usize,
    pub lowered: Case,
    pub certified: bool,
}

/// Lowers every case constant in turn and re-runs the proof.
pub fn perturbation_sweep(
    table: &ClaimTable,
    tb: &Tablebase,
    window: Window,
) -> Result<Vec<Perturbation>> {
    let mut out = Vec::new();
    for (fi, formula) in table.formulas.iter().enumerate() {
        for ci in 0..formula.cases.len() {
            let lowered = perturb(table, fi, ci);
            out.push(Perturbation {
                family: formula.family,
                case: ci,
                lowered: lowered.formulas[fi].cases[ci],
                certified: certifies(&lowered, tb, window)?,
            });
        }
    }
    Ok(out)
}
