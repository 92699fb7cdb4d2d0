//! Rules of the reduced game: white king and rook against a lone black king
//! on an arbitrary `m x n` board.
//!
//! Columns run `1..=m` left to right, rows `1..=n` bottom to top. There is
//! no castling, no fifty-move rule and no repetition rule. A captured rook
//! ends the game as a draw.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported side length.
pub const MAX_SIDE: u32 = 255;

/// Board dimensions: `m` columns by `n` rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dims {
    m: u8,
    n: u8,
}

impl Dims {
    /// Rejects boards on which no legal position exists: both kings need
    /// two squares at Chebyshev distance at least 2, so one side must be at
    /// least 3 long.
    pub fn new(m: u32, n: u32) -> Result<Dims> {
        let degenerate = |reason| Err(Error::DegenerateDims { m, n, reason });
        if m == 0 || n == 0 {
            return degenerate("sides must be positive");
        }
        if m > MAX_SIDE || n > MAX_SIDE {
            return degenerate("side exceeds 255");
        }
        if m.max(n) < 3 {
            return degenerate("no room for two non-adjacent kings");
        }
        Ok(Dims {
            m: m as u8,
            n: n as u8,
        })
    }

    pub fn m(self) -> u32 {
        self.m as u32
    }

    pub fn n(self) -> u32 {
        self.n as u32
    }

    /// Number of squares.
    pub fn squares(self) -> u32 {
        self.m() * self.n()
    }

    pub fn contains(self, sq: Square) -> bool {
        sq.col >= 1 && sq.row >= 1 && sq.col as u32 <= self.m() && sq.row as u32 <= self.n()
    }

    pub fn transposed(self) -> Dims {
        Dims {
            m: self.n,
            n: self.m,
        }
    }

    /// Row-major square index in `0..m*n`.
    pub fn square_index(self, sq: Square) -> u32 {
        (sq.row as u32 - 1) * self.m() + (sq.col as u32 - 1)
    }

    pub fn square_at(self, index: u32) -> Square {
        Square::new(index % self.m() + 1, index / self.m() + 1)
    }

    /// All squares in index order.
    pub fn all_squares(self) -> impl Iterator<Item = Square> {
        (0..self.squares()).map(move |i| self.square_at(i))
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.m, self.n)
    }
}

/// A square, 1-based. Ordering is by column, then row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square {
    pub col: u8,
    pub row: u8,
}

impl Square {
    pub fn new(col: u32, row: u32) -> Square {
        debug_assert!(col <= MAX_SIDE && row <= MAX_SIDE);
        Square {
            col: col as u8,
            row: row as u8,
        }
    }

    pub fn col(self) -> u32 {
        self.col as u32
    }

    pub fn row(self) -> u32 {
        self.row as u32
    }

    /// Chebyshev (king-step) distance.
    pub fn distance(self, other: Square) -> u32 {
        let dc = (self.col as i32 - other.col as i32).unsigned_abs();
        let dr = (self.row as i32 - other.row as i32).unsigned_abs();
        dc.max(dr)
    }

    fn offset(self, dcol: i32, drow: i32, dims: Dims) -> Option<Square> {
        let col = self.col as i32 + dcol;
        let row = self.row as i32 + drow;
        if col < 1 || row < 1 || col > dims.m() as i32 || row > dims.n() as i32 {
            None
        } else {
            Some(Square::new(col as u32, row as u32))
        }
    }

    fn neighbours(self, dims: Dims) -> impl Iterator<Item = Square> {
        KING_STEPS
            .iter()
            .filter_map(move |&(dc, dr)| self.offset(dc, dr, dims))
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if (1..=26).contains(&self.col) {
            write!(f, "{}{}", (b'a' + self.col - 1) as char, self.row)
        } else {
            write!(f, "({},{})", self.col, self.row)
        }
    }
}

const KING_STEPS: [(i32, i32); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

const ROOK_DIRS: [(i32, i32); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    White,
    Black,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::White => Side::Black,
            Side::Black => Side::White,
        }
    }
}

/// Placement of the three pieces plus the side to move. `wr == None` means
/// the rook has been captured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Position {
    pub wk: Square,
    pub wr: Option<Square>,
    pub bk: Square,
    pub stm: Side,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Piece {
    King,
    Rook,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub piece: Piece,
    pub from: Square,
    pub to: Square,
    pub captures_rook: bool,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self.piece {
            Piece::King => 'K',
            Piece::Rook => 'R',
        };
        let sep = if self.captures_rook { 'x' } else { '-' };
        write!(f, "{letter}{}{sep}{}", self.from, self.to)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TerminalKind {
    Checkmate,
    Stalemate,
    RookCaptured,
    Ongoing,
}

/// Does a rook on `rook` attack `target`, with the white king as the only
/// possible blocker?
fn rook_attacks(rook: Square, target: Square, wk: Square) -> bool {
    if rook == target {
        return false;
    }
    if rook.col == target.col {
        let (lo, hi) = (rook.row.min(target.row), rook.row.max(target.row));
        !(wk.col == rook.col && wk.row > lo && wk.row < hi)
    } else if rook.row == target.row {
        let (lo, hi) = (rook.col.min(target.col), rook.col.max(target.col));
        !(wk.row == rook.row && wk.col > lo && wk.col < hi)
    } else {
        false
    }
}

impl Position {
    pub fn new(wk: Square, wr: Option<Square>, bk: Square, stm: Side) -> Position {
        Position { wk, wr, bk, stm }
    }

    /// True iff the rook is on the board and attacks the black king.
    pub fn in_check(&self) -> bool {
        match self.wr {
            Some(wr) => rook_attacks(wr, self.bk, self.wk),
            None => false,
        }
    }

    fn squares_fit(&self, dims: Dims) -> bool {
        dims.contains(self.wk) && dims.contains(self.bk) && self.wr.is_none_or(|r| dims.contains(r))
    }

    fn squares_disjoint(&self) -> bool {
        self.wk != self.bk && self.wr.is_none_or(|r| r != self.wk && r != self.bk)
    }

    pub fn is_legal(&self, dims: Dims) -> bool {
        self.squares_fit(dims)
            && self.squares_disjoint()
            && self.wk.distance(self.bk) >= 2
            && !(self.stm == Side::White && self.in_check())
    }

    fn require_legal(&self, dims: Dims) -> Result<()> {
        if self.is_legal(dims) {
            Ok(())
        } else {
            Err(Error::IllegalPosition(format!("{} on {dims}", self)))
        }
    }

    /// All legal moves for the side to move, sorted by
    /// `(from.col, from.row, to.col, to.row)`.
    pub fn moves(&self, dims: Dims) -> Result<Vec<Move>> {
        self.require_legal(dims)?;
        Ok(self.moves_unchecked(dims))
    }

    /// Move generation for a position already known to be legal.
    pub(crate) fn moves_unchecked(&self, dims: Dims) -> Vec<Move> {
        let mut out = Vec::with_capacity(16);
        match self.stm {
            Side::White => {
                for to in self.wk.neighbours(dims) {
                    if to.distance(self.bk) >= 2 && Some(to) != self.wr {
                        out.push(Move {
                            piece: Piece::King,
                            from: self.wk,
                            to,
                            captures_rook: false,
                        });
                    }
                }
                if let Some(wr) = self.wr {
                    for &(dc, dr) in &ROOK_DIRS {
                        let mut cur = wr;
                        while let Some(to) = cur.offset(dc, dr, dims) {
                            if to == self.wk || to == self.bk {
                                break;
                            }
                            out.push(Move {
                                piece: Piece::Rook,
                                from: wr,
                                to,
                                captures_rook: false,
                            });
                            cur = to;
                        }
                    }
                }
            }
            Side::Black => {
                for to in self.bk.neighbours(dims) {
                    if to.distance(self.wk) < 2 {
                        continue;
                    }
                    match self.wr {
                        Some(wr) if wr == to => {
                            out.push(Move {
                                piece: Piece::King,
                                from: self.bk,
                                to,
                                captures_rook: true,
                            });
                        }
                        Some(wr) if rook_attacks(wr, to, self.wk) => {}
                        _ => out.push(Move {
                            piece: Piece::King,
                            from: self.bk,
                            to,
                            captures_rook: false,
                        }),
                    }
                }
            }
        }
        out.sort_by_key(|mv| (mv.from, mv.to));
        out
    }

    /// Number of legal moves, without allocating.
    pub(crate) fn count_moves_unchecked(&self, dims: Dims) -> usize {
        self.moves_unchecked(dims).len()
    }

    /// Plays `mv`, which must be one of the generated moves.
    pub fn apply(&self, mv: &Move, dims: Dims) -> Result<Position> {
        let moves = self.moves(dims)?;
        if !moves.contains(mv) {
            return Err(Error::IllegalMove(format!("{mv} in {self}")));
        }
        Ok(self.apply_unchecked(mv))
    }

    pub(crate) fn apply_unchecked(&self, mv: &Move) -> Position {
        let mut next = *self;
        match (self.stm, mv.piece) {
            (Side::White, Piece::King) => next.wk = mv.to,
            (Side::White, Piece::Rook) => next.wr = Some(mv.to),
            (Side::Black, _) => {
                next.bk = mv.to;
                if mv.captures_rook {
                    next.wr = None;
                }
            }
        }
        next.stm = self.stm.flip();
        next
    }

    pub fn classify(&self, dims: Dims) -> Result<TerminalKind> {
        self.require_legal(dims)?;
        Ok(self.classify_unchecked(dims))
    }

    pub(crate) fn classify_unchecked(&self, dims: Dims) -> TerminalKind {
        if self.wr.is_none() {
            return TerminalKind::RookCaptured;
        }
        if self.stm == Side::Black && self.count_moves_unchecked(dims) == 0 {
            if self.in_check() {
                TerminalKind::Checkmate
            } else {
                TerminalKind::Stalemate
            }
        } else {
            TerminalKind::Ongoing
        }
    }

    /// Positions from which one legal move leads to `self`, including
    /// rook captures when the rook is gone. `self` must be legal.
    pub fn predecessors(&self, dims: Dims) -> Vec<Position> {
        let mut out = Vec::new();
        match self.stm {
            // Black just moved.
            Side::White => {
                for from in self.bk.neighbours(dims) {
                    if from == self.wk || Some(from) == self.wr || from.distance(self.wk) < 2 {
                        continue;
                    }
                    match self.wr {
                        Some(_) => out.push(Position {
                            bk: from,
                            stm: Side::Black,
                            ..*self
                        }),
                        None => out.push(Position {
                            wr: Some(self.bk),
                            bk: from,
                            stm: Side::Black,
                            ..*self
                        }),
                    }
                }
            }
            // White just moved.
            Side::Black => {
                let Some(wr) = self.wr else { return out };
                for from in self.wk.neighbours(dims) {
                    if from == wr || from.distance(self.bk) < 2 {
                        continue;
                    }
                    let prev = Position {
                        wk: from,
                        stm: Side::White,
                        ..*self
                    };
                    if !prev.in_check() {
                        out.push(prev);
                    }
                }
                for &(dc, dr) in &ROOK_DIRS {
                    let mut cur = wr;
                    while let Some(from) = cur.offset(dc, dr, dims) {
                        if from == self.wk || from == self.bk {
                            break;
                        }
                        let prev = Position {
                            wr: Some(from),
                            stm: Side::White,
                            ..*self
                        };
                        if !prev.in_check() {
                            out.push(prev);
                        }
                        cur = from;
                    }
                }
            }
        }
        out
    }

    pub fn transform(&self, sym: Symmetry, dims: Dims) -> Position {
        Position {
            wk: sym.square(self.wk, dims),
            wr: self.wr.map(|r| sym.square(r, dims)),
            bk: sym.square(self.bk, dims),
            stm: self.stm,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WK{} ", self.wk)?;
        match self.wr {
            Some(r) => write!(f, "WR{} ", r)?,
            None => write!(f, "WR- ")?,
        }
        let side = match self.stm {
            Side::White => 'w',
            Side::Black => 'b',
        };
        write!(f, "BK{} {side}", self.bk)
    }
}

/// Board symmetries. `Transpose` swaps columns and rows and so maps an
/// `m x n` board onto `n x m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    MirrorCols,
    MirrorRows,
    Transpose,
}

impl Symmetry {
    pub fn square(self, sq: Square, dims: Dims) -> Square {
        match self {
            Symmetry::MirrorCols => Square::new(dims.m() + 1 - sq.col(), sq.row()),
            Symmetry::MirrorRows => Square::new(sq.col(), dims.n() + 1 - sq.row()),
            Symmetry::Transpose => Square::new(sq.row(), sq.col()),
        }
    }

    pub fn dims(self, dims: Dims) -> Dims {
        match self {
            Symmetry::Transpose => dims.transposed(),
            _ => dims,
        }
    }

    pub fn apply_move(self, mv: &Move, dims: Dims) -> Move {
        Move {
            from: self.square(mv.from, dims),
            to: self.square(mv.to, dims),
            ..*mv
        }
    }
}

/// A position together with its board, as written in the text grammar
/// `<m>x<n> WK<sq> WR<sq>|WR- BK<sq> <w|b>`, e.g. `3x8 WKb2 WRc1 BKb7 w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Setup {
    pub dims: Dims,
    pub pos: Position,
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.dims, self.pos)
    }
}

/// Parses a square like `b7` (column letter, row number).
pub fn parse_square(s: &str, dims: Dims) -> Result<Square> {
    let mut chars = s.chars();
    let letter = chars
        .next()
        .ok_or_else(|| Error::Parse("empty square".into()))?
        .to_ascii_lowercase();
    if !letter.is_ascii_lowercase() {
        return Err(Error::Parse(format!("bad column in {s:?}")));
    }
    let col = letter as u32 - 'a' as u32 + 1;
    let row: u32 = chars
        .as_str()
        .parse()
        .map_err(|_| Error::Parse(format!("bad row in {s:?}")))?;
    let sq = Square::new(col, row.min(MAX_SIDE));
    if row == 0 || !dims.contains(sq) {
        return Err(Error::Parse(format!("square {s} is off the {dims} board")));
    }
    Ok(sq)
}

impl FromStr for Setup {
    type Err = Error;

    /// Parses and checks legality; overlapping or adjacent pieces are
    /// rejected.
    fn from_str(s: &str) -> Result<Setup> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        let [board, wk, wr, bk, side] = tokens[..] else {
            return Err(Error::Parse(format!(
                "expected 5 fields, got {}",
                tokens.len()
            )));
        };
        let (m, n) = board
            .to_ascii_lowercase()
            .split_once('x')
            .and_then(|(m, n)| Some((m.parse::<u32>().ok()?, n.parse::<u32>().ok()?)))
            .ok_or_else(|| Error::Parse(format!("bad board size {board:?}")))?;
        let dims = Dims::new(m, n)?;
        if dims.m() > 26 {
            return Err(Error::Parse(
                "text grammar supports at most 26 columns".into(),
            ));
        }
        let field = |tok: &str, tag: &str| -> Result<String> {
            if tok.len() > 2 && tok[..2].eq_ignore_ascii_case(tag) {
                Ok(tok[2..].to_string())
            } else {
                Err(Error::Parse(format!("expected {tag}<square>, got {tok:?}")))
            }
        };
        let wk = parse_square(&field(wk, "WK")?, dims)?;
        let wr = if wr.eq_ignore_ascii_case("WR-") {
            None
        } else {
            Some(parse_square(&field(wr, "WR")?, dims)?)
        };
        let bk = parse_square(&field(bk, "BK")?, dims)?;
        let stm = match side {
            "w" | "W" => Side::White,
            "b" | "B" => Side::Black,
            other => {
                return Err(Error::Parse(format!(
                    "side to move must be w or b, got {other:?}"
                )))
            }
        };
        let pos = Position { wk, wr, bk, stm };
        pos.require_legal(dims)?;
        Ok(Setup { dims, pos })
    }
}
