//! Text-mode play against the tablebase.

use std::io::{BufRead, Write};

use krk_core::{Dims, Error, Move, Piece, Position, Result, Side, Tablebase, TerminalKind, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ending {
    Checkmate { white_moves: u32 },
    Draw(&'static str),
    Quit,
    EndOfInput,
}

fn plural(k: u32) -> &'static str {
    if k == 1 {
        "move"
    } else {
        "moves"
    }
}

fn status(tb: &Tablebase, pos: &Position) -> Result<String> {
    Ok(match tb.dtm_moves(pos)? {
        Some(k) => format!("White mates in {k} {}", plural(k)),
        None => "draw".to_string(),
    })
}

/// Parses `Ka3` / `Rc5` (piece and destination) against the legal moves.
fn parse_move(text: &str, pos: &Position, dims: Dims) -> Option<Move> {
    let mut chars = text.trim().chars();
    let piece = match chars.next()?.to_ascii_uppercase() {
        'K' => Piece::King,
        'R' => Piece::Rook,
        _ => return None,
    };
    let to = krk_core::board::parse_square(chars.as_str(), dims).ok()?;
    pos.moves(dims)
        .ok()?
        .into_iter()
        .find(|mv| mv.piece == piece && mv.to == to)
}

/// Strongest reply: optimal when the position is won, otherwise a move that
/// keeps the draw (Black grabs the rook when it can).
fn engine_move(tb: &Tablebase, pos: &Position) -> Result<Move> {
    let dims = tb.dims();
    if tb.dtm_moves(pos)?.is_some() {
        return tb.best_move(pos);
    }
    let moves = pos.moves(dims)?;
    if let Some(capture) = moves.iter().find(|mv| mv.captures_rook) {
        return Ok(*capture);
    }
    for mv in &moves {
        if tb.value(&pos.apply(mv, dims)?)? == Value::Draw {
            return Ok(*mv);
        }
    }
    moves
        .into_iter()
        .next()
        .ok_or_else(|| Error::IllegalMove(format!("no moves from {pos}")))
}

/// The user plays the side to move in `start`; the tablebase plays the
/// other side.
pub fn run<R: BufRead, W: Write>(
    tb: &Tablebase,
    start: Position,
    mut input: R,
    mut out: W,
) -> Result<Ending> {
    let dims = tb.dims();
    let user = start.stm;
    let mut pos = start;
    let mut white_moves = 0;
    writeln!(
        out,
        "You play {}. Enter moves like Ka3 or Rc5, or quit.",
        if user == Side::White {
            "White"
        } else {
            "Black"
        }
    )?;
    loop {
        let ending = match pos.classify(dims)? {
            TerminalKind::Checkmate => Some(Ending::Checkmate { white_moves }),
            TerminalKind::Stalemate => Some(Ending::Draw("stalemate")),
            TerminalKind::RookCaptured => Some(Ending::Draw("rook captured")),
            TerminalKind::Ongoing => None,
        };
        if let Some(ending) = ending {
            match &ending {
                Ending::Checkmate { white_moves } => {
                    writeln!(out, "checkmate, {white_moves} {}", plural(*white_moves))?
                }
                Ending::Draw(why) => writeln!(out, "draw: {why}")?,
                _ => {}
            }
            return Ok(ending);
        }
        writeln!(out, "{} {pos}  [{}]", dims, status(tb, &pos)?)?;
        let mv = if pos.stm == user {
            write!(out, "> ")?;
            out.flush()?;
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                writeln!(out)?;
                return Ok(Ending::EndOfInput);
            }
            let text = line.trim();
            if text.eq_ignore_ascii_case("quit") || text.eq_ignore_ascii_case("q") {
                writeln!(out, "bye")?;
                return Ok(Ending::Quit);
            }
            match parse_move(text, &pos, dims) {
                Some(mv) => mv,
                None => {
                    writeln!(out, "illegal move: {text}")?;
                    continue;
                }
            }
        } else {
            let mv = engine_move(tb, &pos)?;
            writeln!(out, "engine: {mv}")?;
            mv
        };
        if pos.stm == Side::White {
            white_moves += 1;
        }
        pos = pos.apply(&mv, dims)?;
    }
}
