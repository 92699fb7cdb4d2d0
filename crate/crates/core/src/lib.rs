//! Exact solver for the King + Rook versus King endgame on `m x n` boards.
//!
//! * [`board`]: rules, move generation, the position text grammar.
//! * [`tablebase`]: retrograde solution, distance-to-mate queries, the
//!   `RKTB` file format.
//! * [`family`]: stacked configurations on three-column boards and their
//!   claimed mate-distance bounds.
//! * [`induction`]: formula fitting and the base case / inductive step /
//!   stabilization proof kernel.

pub mod board;
pub mod error;
pub mod family;
pub mod induction;
pub mod tablebase;

pub use board::{Dims, Move, Piece, Position, Setup, Side, Square, Symmetry, TerminalKind};
pub use error::{Error, Result};
pub use tablebase::{MaxDtm, Tablebase, Value};
