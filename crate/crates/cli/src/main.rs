//! `krk`: build, query and analyse King+Rook vs King tablebases.

mod play;
mod span;

use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use krk_core::family::{positions_exceeding, verify_claims, ClaimTable, Family};
use krk_core::induction::{perturb, prove, Window};
use krk_core::tablebase::reference_max;
use krk_core::{Dims, Error, Setup, Tablebase, TerminalKind, Value};

use span::Span;

#[derive(Parser)]
#[command(
    name = "krk",
    version,
    about = "Exact King+Rook vs King endgame solver for m x n boards"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an m x n board and save it.
    Build { m: u32, n: u32, out: PathBuf },
    /// Value and best move of one position.
    Query {
        tablebase: PathBuf,
        position: String,
    },
    /// Optimal line from a position to mate.
    Bestline {
        tablebase: PathBuf,
        position: String,
    },
    /// Longest forced mate over a grid of boards.
    Table {
        #[arg(long, default_value = "3-8")]
        rows: Span,
        #[arg(long, default_value = "3-13")]
        cols: Span,
        /// Largest board, in squares, that may be built.
        #[arg(long, default_value_t = 400)]
        budget: u32,
    },
    /// Check that the longest mate on m x n is m+n moves (7 on 4x4).
    Conjecture {
        #[arg(long, default_value = "4-8")]
        rows: Span,
        #[arg(long, default_value = "4-13")]
        cols: Span,
        #[arg(long, default_value_t = 400)]
        budget: u32,
    },
    /// Check the stacked-configuration bounds on a 3 x n board.
    FamilyVerify { n: u32 },
    /// Prove the stacked-configuration bounds for all board heights.
    Prove {
        /// Height of the tablebase used for the base case.
        #[arg(default_value_t = 10)]
        n: u32,
        #[arg(long, default_value_t = 4)]
        a0: u32,
        #[arg(long, default_value_t = 2)]
        b0: u32,
        #[arg(long, default_value_t = 4)]
        side: u32,
        /// Lower one bound constant by one first, e.g. `112:1` (case 1 of
        /// family (1,1,2)); defaults to `111:0`.
        #[arg(long, num_args = 0..=1, default_missing_value = "111:0", value_name = "FAMILY:CASE")]
        perturb: Option<String>,
    },
    /// Play a position against the tablebase on standard input.
    Play {
        tablebase: PathBuf,
        position: String,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::Core(e.into())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(msg) => f.write_str(msg),
            Failure::Core(e) => e.fmt(f),
        }
    }
}

/// `Ok(true)` when every check passed.
type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Build { m, n, out } => build(m, n, &out),
        Command::Query {
            tablebase,
            position,
        } => query(&tablebase, &position),
        Command::Bestline {
            tablebase,
            position,
        } => bestline(&tablebase, &position),
        Command::Table { rows, cols, budget } => table(rows, cols, budget),
        Command::Conjecture { rows, cols, budget } => conjecture(rows, cols, budget),
        Command::FamilyVerify { n } => family_verify(n),
        Command::Prove {
            n,
            a0,
            b0,
            side,
            perturb,
        } => prove_cmd(n, Window { a0, b0, side }, perturb.as_deref()),
        Command::Play {
            tablebase,
            position,
        } => play_cmd(&tablebase, &position),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<Tablebase, Failure> {
    let file = File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(Tablebase::load(BufReader::new(file))?)
}

fn setup_for(tb: &Tablebase, text: &str) -> Result<Setup, Failure> {
    let setup: Setup = text.parse()?;
    if setup.dims != tb.dims() {
        return Err(Error::DimsMismatch {
            expected: tb.dims().to_string(),
            found: setup.dims.to_string(),
        }
        .into());
    }
    Ok(setup)
}

fn build(m: u32, n: u32, out: &Path) -> Outcome {
    let dims = Dims::new(m, n)?;
    let tb = Tablebase::build(dims);
    let file = File::create(out).map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
    tb.save(BufWriter::new(file))?;
    let meta = tb.meta();
    println!(
        "built {dims}: {} wins, {} draws, {} illegal slots",
        meta.wins, meta.draws, meta.illegal
    );
    let max = match tb.max_dtm() {
        Ok(max) => {
            println!(
                "longest forced mate: {} moves, e.g. {dims} {}",
                max.moves, max.witness
            );
            Some(max.moves)
        }
        Err(Error::NoWins(_)) => {
            println!("no wins: White can never force mate on {dims}");
            None
        }
        Err(e) => return Err(e.into()),
    };
    println!("written to {}", out.display());
    println!();
    println!(
        "dims={dims}\nwins={}\ndraws={}\nillegal={}\niterations={}",
        meta.wins, meta.draws, meta.illegal, meta.iterations
    );
    println!(
        "max_dtm={}",
        max.map_or("none".to_string(), |k| k.to_string())
    );
    Ok(true)
}

fn query(path: &Path, text: &str) -> Outcome {
    let tb = load(path)?;
    let Setup { dims, pos } = setup_for(&tb, text)?;
    println!("position: {dims} {pos}");
    let value = tb.value(&pos)?;
    let kind = pos.classify(dims)?;
    match (value, kind) {
        (_, TerminalKind::Checkmate) => {
            println!("value: mate, 0 moves");
            println!("\nvalue=mate\nmoves=0");
        }
        (Value::WhiteWinsIn(plies), _) => {
            let moves = tb.dtm_moves(&pos)?.unwrap_or(0);
            let best = tb.best_move(&pos)?;
            println!("value: White mates in {moves} moves ({plies} plies)");
            println!("best: {best}");
            println!("\nvalue=win\nmoves={moves}\nplies={plies}\nbest={best}");
        }
        _ => {
            println!("value: draw");
            println!("\nvalue=draw");
        }
    }
    Ok(true)
}

fn bestline(path: &Path, text: &str) -> Outcome {
    let tb = load(path)?;
    let Setup { dims, pos } = setup_for(&tb, text)?;
    let Some(moves) = tb.dtm_moves(&pos)? else {
        println!("{dims} {pos} is a draw");
        println!("\nvalue=draw");
        return Ok(true);
    };
    let line = tb.line(&pos)?;
    println!("{dims} {pos}: White mates in {moves}");
    let mut at = pos;
    for (i, mv) in line.iter().enumerate() {
        at = at.apply(mv, dims)?;
        let note = match tb.dtm_moves(&at)? {
            _ if at.classify(dims)? == TerminalKind::Checkmate => "checkmate".to_string(),
            Some(left) => format!("mate in {left}"),
            None => "draw".to_string(),
        };
        println!("{:>3}. {mv:<8} {at}  ({note})", i + 1);
    }
    let text: Vec<String> = line.iter().map(ToString::to_string).collect();
    println!(
        "\nmoves={moves}\nplies={}\nline={}",
        line.len(),
        text.join(" ")
    );
    Ok(true)
}

/// Boards `m <= n` of a requested grid.
struct Grid {
    rows: Span,
    cols: Span,
    /// The request lay entirely below the diagonal and was transposed.
    swapped: bool,
    cells: Vec<(u32, u32)>,
}

fn grid_cells(rows: Span, cols: Span, budget: u32) -> Result<Grid, Failure> {
    let upper = |r: Span, c: Span| -> Vec<(u32, u32)> {
        r.iter()
            .flat_map(|m| c.iter().filter(move |&n| m <= n).map(move |n| (m, n)))
            .collect()
    };
    let (rows, cols, swapped, cells) = match upper(rows, cols) {
        cells if !cells.is_empty() => (rows, cols, false, cells),
        _ => (cols, rows, true, upper(cols, rows)),
    };
    for &(m, n) in &cells {
        Dims::new(m, n)?;
        if m * n > budget {
            return Err(Failure::Input(format!(
                "{m}x{n} has {} squares, over the budget of {budget}",
                m * n
            )));
        }
    }
    Ok(Grid {
        rows,
        cols,
        swapped,
        cells,
    })
}

fn longest(m: u32, n: u32) -> Result<Option<u32>, Failure> {
    match Tablebase::build(Dims::new(m, n)?).max_dtm() {
        Ok(max) => Ok(Some(max.moves)),
        Err(Error::NoWins(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn table(rows: Span, cols: Span, budget: u32) -> Outcome {
    let Grid {
        rows,
        cols,
        swapped,
        cells,
    } = grid_cells(rows, cols, budget)?;
    if swapped {
        println!("note: rows and columns swapped, values are symmetric");
    }
    let mut values = std::collections::BTreeMap::new();
    for &(m, n) in &cells {
        values.insert((m, n), longest(m, n)?);
    }
    print!("{:>5}", "m\\n");
    for n in cols.iter() {
        print!("{n:>5}");
    }
    println!();
    for m in rows.iter() {
        print!("{m:>5}");
        for n in cols.iter() {
            let cell = match values.get(&(m, n)) {
                None => "-".to_string(),
                Some(None) => ".".to_string(),
                Some(Some(v)) if reference_max(m, n).is_some() => v.to_string(),
                Some(Some(v)) => format!("{v}*"),
            };
            print!("{cell:>5}");
        }
        println!();
    }
    println!("- below the diagonal (same as the transpose), . no forced mate, * not in the reference table");
    let mismatched: Vec<String> = values
        .iter()
        .filter_map(|(&(m, n), v)| match (reference_max(m, n), v) {
            (Some(r), Some(v)) if r != *v => Some(format!("{m}x{n}")),
            _ => None,
        })
        .collect();
    println!();
    for ((m, n), v) in &values {
        println!(
            "u_{m}_{n}={}",
            v.map_or("none".to_string(), |k| k.to_string())
        );
    }
    let fresh: Vec<String> = values
        .keys()
        .filter(|(m, n)| reference_max(*m, *n).is_none())
        .map(|(m, n)| format!("{m}x{n}"))
        .collect();
    println!("unreported={}", fresh.join(","));
    println!("reference_mismatches={}", mismatched.join(","));
    Ok(mismatched.is_empty())
}

fn conjecture(rows: Span, cols: Span, budget: u32) -> Outcome {
    let Grid { swapped, cells, .. } = grid_cells(rows, cols, budget)?;
    if swapped {
        println!("note: rows and columns swapped, values are symmetric");
    }
    let mut checked = Vec::new();
    let mut counter = Vec::new();
    for (m, n) in cells.into_iter().filter(|&(m, n)| m >= 4 && n >= 4) {
        let expected = if (m, n) == (4, 4) { 7 } else { m + n };
        let found = longest(m, n)?;
        let reported = if reference_max(m, n).is_some() {
            ""
        } else {
            " (not in the reference table)"
        };
        if found == Some(expected) {
            println!("{m}x{n}: {expected} = expected{reported}");
        } else {
            let shown = found.map_or("no mate".to_string(), |k| k.to_string());
            println!("{m}x{n}: {shown}, expected {expected}  COUNTEREXAMPLE{reported}");
            counter.push(format!("{m}x{n}"));
        }
        checked.push(format!("{m}x{n}"));
    }
    println!(
        "{} boards checked, {}",
        checked.len(),
        if counter.is_empty() {
            "bound holds and is attained on all".to_string()
        } else {
            format!("{} counterexamples", counter.len())
        }
    );
    println!(
        "\nchecked={}\ncounterexamples={}\nholds={}",
        checked.len(),
        counter.join(","),
        counter.is_empty()
    );
    Ok(counter.is_empty())
}

fn three_by(n: u32) -> Result<Tablebase, Failure> {
    Ok(Tablebase::build(Dims::new(3, n)?))
}

fn family_verify(n: u32) -> Outcome {
    let tb = three_by(n)?;
    let report = verify_claims(&tb, &ClaimTable::standard())?;
    print!("{}", report.render_text());
    let beyond = positions_exceeding(&tb, n + 2);
    println!(
        "positions needing more than n+2 = {} moves: {}",
        n + 2,
        beyond.len()
    );
    for (pos, k) in beyond.iter().take(10) {
        println!("  {pos}: {k}");
    }
    println!();
    print!("{}", report.render_kv());
    println!("beyond_n_plus_2={}", beyond.len());
    Ok(report.is_clean())
}

fn parse_perturbation(spec: &str, table: &ClaimTable) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Input(format!("perturbation `{spec}` must look like 112:1"));
    let (fam, case) = spec.split_once(':').ok_or_else(bad)?;
    let digits: Vec<u8> = fam.bytes().map(|b| b.wrapping_sub(b'0')).collect();
    if digits.len() != 3 || digits.iter().any(|&d| !(1..=3).contains(&d)) {
        return Err(bad());
    }
    let family = Family::new(digits[0], digits[1], digits[2]);
    let case: usize = case.parse().map_err(|_| bad())?;
    let idx = table
        .formulas
        .iter()
        .position(|f| f.family == family)
        .ok_or_else(|| Failure::Input(format!("no formula for family {family}")))?;
    if case >= table.formulas[idx].cases.len() {
        return Err(Failure::Input(format!(
            "family {family} has {} cases",
            table.formulas[idx].cases.len()
        )));
    }
    Ok((idx, case))
}

fn prove_cmd(n: u32, window: Window, perturbation: Option<&str>) -> Outcome {
    let mut formulas = ClaimTable::standard();
    if let Some(spec) = perturbation {
        let (f, c) = parse_perturbation(spec, &formulas)?;
        formulas = perturb(&formulas, f, c);
        let family = formulas.formulas[f].family;
        println!(
            "perturbed: {family} case {c} lowered to {}\n",
            formulas.formulas[f].cases[c].bound
        );
    }
    let tb = three_by(n)?;
    let report = prove(&formulas, &tb, window)?;
    print!("{}", report.render_text());
    println!();
    print!("{}", report.render_kv());
    Ok(report.certified)
}

fn play_cmd(path: &Path, text: &str) -> Outcome {
    let tb = load(path)?;
    let Setup { pos, .. } = setup_for(&tb, text)?;
    let stdin = io::stdin();
    play::run(&tb, pos, stdin.lock(), io::stdout().lock())?;
    Ok(true)
}
