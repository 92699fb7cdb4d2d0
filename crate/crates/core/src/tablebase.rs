//! Dense retrograde tablebase for one board size.
//!
//! Every candidate position (three squares, rook possibly captured, side to
//! move) owns one slot in a flat `u16` array:
//!
//! ```text
//! index = ((bk * S + wk) * (S + 1) + wr_or_S) * 2 + stm_bit     S = m * n
//! ```
//!
//! with `stm_bit` 0 for White and 1 for Black. Slots hold the ply count to
//! mate, or one of the sentinels [`ILLEGAL`] and [`DRAW`].

use std::io::{Read, Write};
use std::sync::atomic::{AtomicU16, AtomicU8, Ordering};

use rayon::prelude::*;

use crate::board::{Dims, Move, Position, Side, TerminalKind};
use crate::error::{Error, Result};

pub const ILLEGAL: u16 = 0xFFFF;
pub const DRAW: u16 = 0xFFFE;

/// Environment variable selecting the number of build workers.
pub const WORKERS_ENV: &str = "KRK_WORKERS";

const MAGIC: &[u8; 4] = b"RKTB";
const VERSION: u16 = 1;
/// Magic, version, m, n, reserved.
pub const HEADER_LEN: usize = 4 + 2 + 2 + 2 + 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Value {
    Illegal,
    Draw,
    /// White mates in this many plies.
    WhiteWinsIn(u16),
}

impl Value {
    fn from_raw(raw: u16) -> Value {
        match raw {
            ILLEGAL => Value::Illegal,
            DRAW => Value::Draw,
            p => Value::WhiteWinsIn(p),
        }
    }

    pub fn plies(self) -> Option<u16> {
        match self {
            Value::WhiteWinsIn(p) => Some(p),
            _ => None,
        }
    }
}

/// Converts a ply count into White moves for the given side to move.
pub fn plies_to_moves(plies: u16, stm: Side) -> u32 {
    match stm {
        Side::White => (plies as u32).div_ceil(2),
        Side::Black => plies as u32 / 2,
    }
}

/// Number of slots for `dims`.
pub fn index_len(dims: Dims) -> u64 {
    let s = dims.squares() as u64;
    2 * s * s * (s + 1)
}

/// Maps a position candidate (in-bounds squares, legality not required)
/// to its slot.
pub fn index(pos: &Position, dims: Dims) -> Result<u64> {
    for sq in [Some(pos.wk), pos.wr, Some(pos.bk)].into_iter().flatten() {
        if !dims.contains(sq) {
            return Err(Error::DimsMismatch {
                expected: dims.to_string(),
                found: format!("square {sq}"),
            });
        }
    }
    Ok(index_unchecked(pos, dims))
}

fn index_unchecked(pos: &Position, dims: Dims) -> u64 {
    let s = dims.squares() as u64;
    let bk = dims.square_index(pos.bk) as u64;
    let wk = dims.square_index(pos.wk) as u64;
    let wr = pos.wr.map_or(s, |r| dims.square_index(r) as u64);
    let stm = match pos.stm {
        Side::White => 0,
        Side::Black => 1,
    };
    ((bk * s + wk) * (s + 1) + wr) * 2 + stm
}

pub fn deindex(i: u64, dims: Dims) -> Result<Position> {
    let size = index_len(dims);
    if i >= size {
        return Err(Error::IndexOutOfRange { index: i, size });
    }
    Ok(deindex_unchecked(i, dims))
}

fn deindex_unchecked(i: u64, dims: Dims) -> Position {
    let s = dims.squares() as u64;
    let stm = if i.is_multiple_of(2) {
        Side::White
    } else {
        Side::Black
    };
    let rest = i / 2;
    let wr = rest % (s + 1);
    let rest = rest / (s + 1);
    let wk = rest % s;
    let bk = rest / s;
    let sq = |k: u64| dims.square_at(k as u32);
    Position {
        wk: sq(wk),
        wr: (wr < s).then(|| sq(wr)),
        bk: sq(bk),
        stm,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct BuildMeta {
    /// Number of ply levels propagated (largest ply count + 1).
    pub iterations: u32,
    pub wins: u64,
    pub draws: u64,
    pub illegal: u64,
}

impl BuildMeta {
    fn from_values(values: &[u16]) -> BuildMeta {
        let mut meta = BuildMeta::default();
        let mut max_ply = None;
        for &v in values {
            match v {
                ILLEGAL => meta.illegal += 1,
                DRAW => meta.draws += 1,
                p => {
                    meta.wins += 1;
                    max_ply = max_ply.max(Some(p));
                }
            }
        }
        meta.iterations = max_ply.map_or(0, |p| p as u32 + 1);
        meta
    }
}

/// Longest forced mates previously reported for small boards, as
/// `(m, first n, values for n, n + 1, ...)` with `m <= n`.
const REFERENCE_MAXIMA: [(u32, u32, &[u32]); 6] = [
    (3, 3, &[3, 5, 7, 8, 9, 10, 11, 12, 13, 14, 15]),
    (4, 4, &[7, 9, 10, 11, 12, 13, 14, 15, 16, 17]),
    (5, 5, &[10, 11, 12, 13, 14, 15, 16, 17, 18]),
    (6, 6, &[12, 13, 14]),
    (7, 7, &[14, 15]),
    (8, 8, &[16]),
];

/// Reported longest forced mate on `m x n`, in either orientation.
pub fn reference_max(m: u32, n: u32) -> Option<u32> {
    let (m, n) = (m.min(n), m.max(n));
    let (_, first, values) = REFERENCE_MAXIMA.iter().find(|(row, _, _)| *row == m)?;
    values.get(n.checked_sub(*first)? as usize).copied()
}

/// Longest forced mate on a board, in White moves, with a witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaxDtm {
    pub dims: Dims,
    pub moves: u32,
    pub witness: Position,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tablebase {
    dims: Dims,
    values: Vec<u16>,
    meta: BuildMeta,
}

fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
}

impl Tablebase {
    /// Solves every position on `dims`. Worker count comes from
    /// `KRK_WORKERS`, falling back to rayon's default.
    pub fn build(dims: Dims) -> Tablebase {
        match workers_from_env() {
            Some(w) => Tablebase::build_with_workers(dims, w),
            None => Tablebase::solve(dims),
        }
    }

    /// The result never depends on `workers`.
    pub fn build_with_workers(dims: Dims, workers: usize) -> Tablebase {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .expect("thread pool");
        pool.install(|| Tablebase::solve(dims))
    }

    fn solve(dims: Dims) -> Tablebase {
        let len = index_len(dims) as usize;
        let values: Vec<AtomicU16> = (0..len).map(|_| AtomicU16::new(ILLEGAL)).collect();
        let pending: Vec<AtomicU8> = (0..len).map(|_| AtomicU8::new(0)).collect();

        // Seed: legal slots start as draws, mates are ply 0, and every
        // black-to-move slot counts its moves.
        let mut frontier: Vec<u64> = (0..len as u64)
            .into_par_iter()
            .filter_map(|i| {
                let pos = deindex_unchecked(i, dims);
                if !pos.is_legal(dims) {
                    return None;
                }
                let slot = i as usize;
                values[slot].store(DRAW, Ordering::Relaxed);
                if pos.stm == Side::Black && pos.wr.is_some() {
                    let count = pos.count_moves_unchecked(dims);
                    pending[slot].store(count as u8, Ordering::Relaxed);
                    if count == 0 && pos.in_check() {
                        values[slot].store(0, Ordering::Relaxed);
                        return Some(i);
                    }
                }
                None
            })
            .collect();

        let mut ply: u16 = 0;
        while !frontier.is_empty() {
            assert!(ply < DRAW - 1, "ply counter overflow");
            let next_ply = ply + 1;
            let mut next: Vec<u64> = frontier
                .par_iter()
                .flat_map_iter(|&i| {
                    let pos = deindex_unchecked(i, dims);
                    let mut solved = Vec::new();
                    for prev in pos.predecessors(dims) {
                        let j = index_unchecked(&prev, dims) as usize;
                        match prev.stm {
                            // White picks the fastest mate: first visit wins.
                            Side::White => {
                                if values[j]
                                    .compare_exchange(
                                        DRAW,
                                        next_ply,
                                        Ordering::Relaxed,
                                        Ordering::Relaxed,
                                    )
                                    .is_ok()
                                {
                                    solved.push(j as u64);
                                }
                            }
                            // Black is lost once every reply is lost; the last
                            // one to resolve is the longest.
                            Side::Black => {
                                if pending[j].fetch_sub(1, Ordering::Relaxed) == 1 {
                                    values[j].store(next_ply, Ordering::Relaxed);
                                    solved.push(j as u64);
                                }
                            }
                        }
                    }
                    solved
                })
                .collect();
            next.par_sort_unstable();
            frontier = next;
            ply = next_ply;
        }

        let values: Vec<u16> = values.into_iter().map(AtomicU16::into_inner).collect();
        let meta = BuildMeta::from_values(&values);
        Tablebase { dims, values, meta }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn meta(&self) -> BuildMeta {
        self.meta
    }

    pub fn raw_values(&self) -> &[u16] {
        &self.values
    }

    /// Value of an in-bounds candidate; illegal candidates read `Illegal`.
    pub fn value(&self, pos: &Position) -> Result<Value> {
        let i = index(pos, self.dims)?;
        Ok(Value::from_raw(self.values[i as usize]))
    }

    pub fn value_at(&self, i: u64) -> Value {
        Value::from_raw(self.values[i as usize])
    }

    fn legal_value(&self, pos: &Position) -> Result<Value> {
        match self.value(pos)? {
            Value::Illegal => Err(Error::IllegalPosition(format!("{pos} on {}", self.dims))),
            v => Ok(v),
        }
    }

    /// Distance to mate in White moves; `None` for a draw.
    pub fn dtm_moves(&self, pos: &Position) -> Result<Option<u32>> {
        Ok(self
            .legal_value(pos)?
            .plies()
            .map(|p| plies_to_moves(p, pos.stm)))
    }

    fn winning_plies(&self, pos: &Position) -> Result<u16> {
        self.legal_value(pos)?
            .plies()
            .ok_or_else(|| Error::NotWinning(pos.to_string()))
    }

    /// Lexicographically first optimal move: fastest for White, most
    /// stubborn for Black.
    pub fn best_move(&self, pos: &Position) -> Result<Move> {
        let plies = self.winning_plies(pos)?;
        if plies == 0 {
            return Err(Error::NotWinning(format!("{pos} is already mate")));
        }
        let mut best: Option<(u16, Move)> = None;
        for mv in pos.moves_unchecked(self.dims) {
            let next = pos.apply_unchecked(&mv);
            let Some(p) = self.value(&next)?.plies() else {
                continue;
            };
            let better = match (&best, pos.stm) {
                (None, _) => true,
                (Some((b, _)), Side::White) => p < *b,
                (Some((b, _)), Side::Black) => p > *b,
            };
            if better {
                best = Some((p, mv));
            }
        }
        let (p, mv) = best.ok_or_else(|| Error::NotWinning(pos.to_string()))?;
        debug_assert_eq!(p + 1, plies);
        Ok(mv)
    }

    /// Optimal play from `pos` down to checkmate.
    pub fn line(&self, pos: &Position) -> Result<Vec<Move>> {
        self.winning_plies(pos)?;
        let mut cur = *pos;
        let mut out = Vec::new();
        while self.winning_plies(&cur)? > 0 {
            let mv = self.best_move(&cur)?;
            cur = cur.apply_unchecked(&mv);
            out.push(mv);
        }
        debug_assert_eq!(cur.classify_unchecked(self.dims), TerminalKind::Checkmate);
        Ok(out)
    }

    /// The board's longest forced mate over White-to-move positions; the
    /// witness is the maximiser with the lowest index.
    pub fn max_dtm(&self) -> Result<MaxDtm> {
        let mut best: Option<(u16, u64)> = None;
        for (i, &v) in self.values.iter().enumerate().step_by(2) {
            if v < DRAW && best.is_none_or(|(b, _)| v > b) {
                best = Some((v, i as u64));
            }
        }
        let (plies, i) = best.ok_or_else(|| Error::NoWins(self.dims.to_string()))?;
        Ok(MaxDtm {
            dims: self.dims,
            moves: plies_to_moves(plies, Side::White),
            witness: deindex_unchecked(i, self.dims),
        })
    }

    /// Legal positions with their values, in index order.
    pub fn legal_positions(&self) -> impl Iterator<Item = (Position, Value)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != ILLEGAL)
            .map(|(i, &v)| (deindex_unchecked(i as u64, self.dims), Value::from_raw(v)))
    }

    /// Indices whose stored value disagrees with a one-move lookahead over
    /// the stored values of the successors. An empty result certifies every
    /// recorded mate distance; it cannot rule out a win stored as a draw on
    /// a cycle of such draws.
    pub fn inconsistencies(&self) -> Vec<u64> {
        let dims = self.dims;
        (0..self.values.len() as u64)
            .into_par_iter()
            .filter(|&i| {
                let stored = self.values[i as usize];
                let pos = deindex_unchecked(i, dims);
                match (stored == ILLEGAL, pos.is_legal(dims)) {
                    (true, legal) => legal,
                    (false, false) => true,
                    (false, true) => Some(stored) != self.expected(&pos),
                }
            })
            .collect()
    }

    fn expected(&self, pos: &Position) -> Option<u16> {
        if pos.wr.is_none() {
            return Some(DRAW);
        }
        let moves = pos.moves(self.dims).ok()?;
        if moves.is_empty() {
            return Some(if pos.in_check() { 0 } else { DRAW });
        }
        let mut children = Vec::with_capacity(moves.len());
        for mv in &moves {
            let next = pos.apply(mv, self.dims).ok()?;
            children.push(self.value(&next).ok()?.plies());
        }
        let best = match pos.stm {
            Side::White => children.into_iter().flatten().min(),
            Side::Black => children
                .into_iter()
                .collect::<Option<Vec<u16>>>()
                .and_then(|c| c.into_iter().max()),
        };
        Some(best.map_or(DRAW, |p| p + 1))
    }

    pub fn save<W: Write>(&self, mut sink: W) -> Result<()> {
        let mut header = Vec::with_capacity(HEADER_LEN);
        header.extend_from_slice(MAGIC);
        header.extend_from_slice(&VERSION.to_le_bytes());
        header.extend_from_slice(&(self.dims.m() as u16).to_le_bytes());
        header.extend_from_slice(&(self.dims.n() as u16).to_le_bytes());
        header.extend_from_slice(&0u32.to_le_bytes());
        sink.write_all(&header)?;
        let mut body = Vec::with_capacity(self.values.len() * 2);
        for v in &self.values {
            body.extend_from_slice(&v.to_le_bytes());
        }
        sink.write_all(&body)?;
        sink.flush()?;
        Ok(())
    }

    pub fn load<R: Read>(mut source: R) -> Result<Tablebase> {
        let mut header = [0u8; HEADER_LEN];
        source
            .read_exact(&mut header)
            .map_err(|_| Error::Format("truncated header".into()))?;
        if &header[0..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let u16_at = |k: usize| u16::from_le_bytes([header[k], header[k + 1]]);
        let version = u16_at(4);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let (m, n) = (u16_at(6) as u32, u16_at(8) as u32);
        if u32::from_le_bytes([header[10], header[11], header[12], header[13]]) != 0 {
            return Err(Error::Format("reserved field is not zero".into()));
        }
        let dims = Dims::new(m, n).map_err(|e| Error::Format(format!("dims: {e}")))?;
        let len = usize::try_from(index_len(dims))
            .map_err(|_| Error::Format(format!("{dims} too large")))?;
        let mut body = Vec::new();
        source.read_to_end(&mut body)?;
        if body.len() != len * 2 {
            return Err(Error::Format(format!(
                "payload is {} bytes, expected {}",
                body.len(),
                len * 2
            )));
        }
        let values: Vec<u16> = body
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect();
        let meta = BuildMeta::from_values(&values);
        Ok(Tablebase { dims, values, meta })
    }
}
