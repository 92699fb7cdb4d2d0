//! Forward-search reference solver with its own move rules, used to check
//! the retrograde tables.

#![allow(dead_code)]

use std::collections::HashMap;

use krk_core::{Dims, Position, Side, Square, Tablebase, Value};

type Sq = (i32, i32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct State {
    wk: Sq,
    wr: Option<Sq>,
    bk: Sq,
    white: bool,
}

pub struct Oracle {
    m: i32,
    n: i32,
    memo: HashMap<(State, u32), bool>,
}

const STEPS: [Sq; 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];
const LINES: [Sq; 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

fn touching(a: Sq, b: Sq) -> bool {
    (a.0 - b.0).abs() <= 1 && (a.1 - b.1).abs() <= 1
}

impl Oracle {
    pub fn new(m: u32, n: u32) -> Oracle {
        Oracle {
            m: m as i32,
            n: n as i32,
            memo: HashMap::new(),
        }
    }

    /// Search horizon in plies.
    pub fn horizon(&self) -> u32 {
        2 * (self.m + self.n + 5) as u32
    }

    fn inside(&self, s: Sq) -> bool {
        s.0 >= 1 && s.0 <= self.m && s.1 >= 1 && s.1 <= self.n
    }

    /// Rook sees `target` along a line with only the white king in the way.
    fn rook_hits(rook: Sq, target: Sq, wk: Sq) -> bool {
        if rook == target || (rook.0 != target.0 && rook.1 != target.1) {
            return false;
        }
        let step = ((target.0 - rook.0).signum(), (target.1 - rook.1).signum());
        let mut at = (rook.0 + step.0, rook.1 + step.1);
        while at != target {
            if at == wk {
                return false;
            }
            at = (at.0 + step.0, at.1 + step.1);
        }
        true
    }

    fn checked(s: &State) -> bool {
        s.wr.is_some_and(|r| Oracle::rook_hits(r, s.bk, s.wk))
    }

    pub fn legal(&self, s: &State) -> bool {
        let mut squares = vec![s.wk, s.bk];
        squares.extend(s.wr);
        if !squares.iter().all(|&q| self.inside(q)) || touching(s.wk, s.bk) {
            return false;
        }
        if s.wr.is_some_and(|r| r == s.wk || r == s.bk) {
            return false;
        }
        !(s.white && Oracle::checked(s))
    }

    fn children(&self, s: &State) -> Vec<State> {
        let mut out = Vec::new();
        if s.white {
            for d in STEPS {
                let to = (s.wk.0 + d.0, s.wk.1 + d.1);
                if self.inside(to) && Some(to) != s.wr && !touching(to, s.bk) {
                    out.push(State {
                        wk: to,
                        white: false,
                        ..*s
                    });
                }
            }
            if let Some(r) = s.wr {
                for d in LINES {
                    let mut to = (r.0 + d.0, r.1 + d.1);
                    while self.inside(to) && to != s.wk && to != s.bk {
                        out.push(State {
                            wr: Some(to),
                            white: false,
                            ..*s
                        });
                        to = (to.0 + d.0, to.1 + d.1);
                    }
                }
            }
        } else {
            for d in STEPS {
                let to = (s.bk.0 + d.0, s.bk.1 + d.1);
                if !self.inside(to) || touching(to, s.wk) {
                    continue;
                }
                let wr = if s.wr == Some(to) { None } else { s.wr };
                let next = State {
                    wr,
                    bk: to,
                    white: true,
                    ..*s
                };
                if !Oracle::checked(&next) {
                    out.push(next);
                }
            }
        }
        out
    }

    /// White can force mate within `plies` half-moves.
    fn wins_within(&mut self, s: &State, plies: u32) -> bool {
        if let Some(&hit) = self.memo.get(&(*s, plies)) {
            return hit;
        }
        let children = self.children(s);
        let result = if s.wr.is_none() {
            false
        } else if s.white {
            plies > 0 && children.iter().any(|c| self.wins_within(c, plies - 1))
        } else if children.is_empty() {
            Oracle::checked(s)
        } else {
            plies > 0 && children.iter().all(|c| self.wins_within(c, plies - 1))
        };
        self.memo.insert((*s, plies), result);
        result
    }

    /// Mate distance in plies, `None` when no mate exists within the horizon.
    pub fn plies(&mut self, s: &State) -> Option<u32> {
        (0..=self.horizon()).find(|&p| self.wins_within(s, p))
    }
}

pub fn state_of(pos: &Position) -> State {
    let sq = |s: Square| (s.col() as i32, s.row() as i32);
    State {
        wk: sq(pos.wk),
        wr: pos.wr.map(sq),
        bk: sq(pos.bk),
        white: pos.stm == Side::White,
    }
}

/// Every placement of the pieces, legal or not.
pub fn all_positions(dims: Dims) -> Vec<Position> {
    let squares: Vec<Square> = dims.all_squares().collect();
    let mut rooks: Vec<Option<Square>> = squares.iter().copied().map(Some).collect();
    rooks.push(None);
    let mut out = Vec::new();
    for &wk in &squares {
        for &bk in &squares {
            for &wr in &rooks {
                for stm in [Side::White, Side::Black] {
                    out.push(Position::new(wk, wr, bk, stm));
                }
            }
        }
    }
    out
}

/// Positions where the retrograde table and the oracle disagree, either on
/// legality or on the mate distance.
pub fn oracle_disagreements(m: u32, n: u32) -> Vec<Position> {
    let dims = Dims::new(m, n).unwrap();
    let tb = Tablebase::build(dims);
    let mut oracle = Oracle::new(m, n);
    let mut bad = Vec::new();
    for pos in all_positions(dims) {
        let state = state_of(&pos);
        let stored = tb.value(&pos).unwrap();
        let agrees = match (oracle.legal(&state), stored) {
            (false, Value::Illegal) => true,
            (false, _) | (true, Value::Illegal) => false,
            (true, v) => v.plies().map(u32::from) == oracle.plies(&state),
        };
        if !agrees {
            bad.push(pos);
        }
    }
    bad
}
