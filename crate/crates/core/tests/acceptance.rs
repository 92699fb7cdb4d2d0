//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use krk_core::family::{c_dependence, mirror_mismatches, verify_claims, ClaimTable};
use krk_core::induction::{perturbation_sweep, prove, Window};
use krk_core::tablebase::HEADER_LEN;
use krk_core::{Dims, Error, Side, Symmetry, Tablebase, TerminalKind};

/// Published maxima, by board: `(m, first n, values for n, n+1, ...)`.
const PUBLISHED: [(u32, u32, &[u32]); 6] = [
    (3, 3, &[3, 5, 7, 8, 9, 10, 11, 12, 13, 14, 15]),
    (4, 4, &[7, 9, 10, 11, 12, 13, 14, 15, 16, 17]),
    (5, 5, &[10, 11, 12, 13, 14, 15, 16, 17, 18]),
    (6, 6, &[12, 13, 14]),
    (7, 7, &[14, 15]),
    (8, 8, &[16]),
];

fn published() -> BTreeMap<(u32, u32), u32> {
    let mut out = BTreeMap::new();
    for (m, first, values) in PUBLISHED {
        for (k, &v) in values.iter().enumerate() {
            out.insert((m, first + k as u32), v);
        }
    }
    out
}

fn dims(m: u32, n: u32) -> Dims {
    Dims::new(m, n).unwrap()
}

type Outcome = Result<String, String>;

fn within(elapsed: Duration, budget: Duration, what: &str) -> std::result::Result<(), String> {
    if elapsed <= budget {
        Ok(())
    } else {
        Err(format!("{what} took {elapsed:.2?}, budget {budget:?}"))
    }
}

/// Maxima for m in 3..=8, n in m..=13, with per-board build times.
struct Grid {
    max: BTreeMap<(u32, u32), u32>,
    time: BTreeMap<(u32, u32), Duration>,
}

fn grid() -> Grid {
    let mut max = BTreeMap::new();
    let mut time = BTreeMap::new();
    for m in 3..=8 {
        for n in m..=13 {
            let start = Instant::now();
            let tb = Tablebase::build(dims(m, n));
            let moves = tb.max_dtm().unwrap().moves;
            time.insert((m, n), start.elapsed());
            max.insert((m, n), moves);
        }
    }
    Grid { max, time }
}

fn table_one(grid: &Grid) -> Outcome {
    let published = published();
    let wrong: Vec<String> = published
        .iter()
        .filter(|(cell, v)| grid.max[cell] != **v)
        .map(|((m, n), v)| format!("U({m},{n}) = {} not {v}", grid.max[&(*m, *n)]))
        .collect();
    let total: Duration = published.keys().map(|c| grid.time[c]).sum();
    let slowest = grid
        .time
        .iter()
        .filter(|((m, n), _)| *m <= 8 && *n <= 8)
        .map(|(_, t)| *t)
        .max()
        .unwrap();
    if !wrong.is_empty() {
        return Err(wrong.join(", "));
    }
    within(slowest, Duration::from_secs(1), "slowest board up to 8x8")?;
    within(total, Duration::from_secs(30), "published grid")?;
    Ok(format!(
        "{} published cells exact; slowest board up to 8x8 {slowest:.2?}, all published boards {total:.2?}",
        published.len()
    ))
}

fn three_by_n() -> Outcome {
    let start = Instant::now();
    let mut wrong = Vec::new();
    for n in 5..=20 {
        let moves = Tablebase::build(dims(3, n)).max_dtm().unwrap().moves;
        if moves != n + 2 {
            wrong.push(format!("3x{n}: {moves}"));
        }
    }
    if !wrong.is_empty() {
        return Err(format!("max != n+2 at {}", wrong.join(", ")));
    }
    within(start.elapsed(), Duration::from_secs(10), "3xn sweep")?;
    Ok(format!(
        "max = n+2 for 5 <= n <= 20 in {:.2?}",
        start.elapsed()
    ))
}

fn claim_sweep() -> Outcome {
    let start = Instant::now();
    let report = verify_claims(&Tablebase::build(dims(3, 12)), &ClaimTable::standard()).unwrap();
    if !report.is_clean() {
        return Err(format!(
            "{} violations, {} coverage gaps",
            report.violations.len(),
            report.coverage_gaps.len()
        ));
    }
    let unattained: Vec<String> = report
        .families
        .iter()
        .filter(|s| !s.attained())
        .map(|s| s.family.to_string())
        .collect();
    if !unattained.is_empty() {
        return Err(format!("bound never attained for {}", unattained.join(" ")));
    }
    within(start.elapsed(), Duration::from_secs(5), "claim sweep")?;
    Ok(format!(
        "3x12: {} configurations, 0 violations, all {} families attain their bound",
        report.checked,
        report.families.len()
    ))
}

fn invariance() -> Outcome {
    let tb = Tablebase::build(dims(3, 12));
    let c = c_dependence(&tb).unwrap();
    let mirror = mirror_mismatches(&tb).unwrap();
    if !c.is_empty() || !mirror.is_empty() {
        return Err(format!(
            "{} rook-row dependences, {} mirror mismatches",
            c.len(),
            mirror.len()
        ));
    }
    Ok("3x12: no dependence on the rook row, no mirror mismatch".into())
}

fn proof() -> Outcome {
    let start = Instant::now();
    let tb = Tablebase::build(dims(3, 10));
    let table = ClaimTable::standard();
    let report = prove(&table, &tb, Window::default()).unwrap();
    if !report.certified {
        return Err(format!(
            "not certified: base {}, step {}, stabilization {}",
            report.base_ok(),
            report.step_ok(),
            report.stabilization_ok()
        ));
    }
    let sweep = perturbation_sweep(&table, &tb, Window::default()).unwrap();
    let survivors: Vec<String> = sweep
        .iter()
        .filter(|p| p.certified)
        .map(|p| format!("{} case {}", p.family, p.case))
        .collect();
    if !survivors.is_empty() {
        return Err(format!(
            "lowered constants still certify: {}",
            survivors.join(", ")
        ));
    }
    within(
        start.elapsed(),
        Duration::from_secs(10),
        "proof and perturbations",
    )?;
    Ok(format!(
        "{} families / {} cases certified on 3x10 ({} step cells, {} classes); all {} lowered constants rejected; {:.2?}",
        report.families,
        report.cases,
        report.step.cells.len(),
        report.stabilization.classes,
        sweep.len(),
        start.elapsed()
    ))
}

fn conjecture(grid: &Grid) -> Outcome {
    let published = published();
    let mut checked = 0;
    let mut broken = Vec::new();
    let mut flagged = Vec::new();
    for (&(m, n), &moves) in grid.max.iter().filter(|((m, n), _)| *m >= 4 && *n >= 4) {
        checked += 1;
        let expected = if (m, n) == (4, 4) { 7 } else { m + n };
        if moves == expected {
            continue;
        }
        let note = format!("U({m},{n}) = {moves}, m+n = {}", m + n);
        if published.contains_key(&(m, n)) {
            broken.push(note);
        } else {
            flagged.push(note);
        }
    }
    let total: Duration = grid.time.values().sum();
    if !broken.is_empty() {
        return Err(broken.join(", "));
    }
    within(total, Duration::from_secs(120), "grid through 8x13")?;
    let flags = if flagged.is_empty() {
        "none flagged".to_string()
    } else {
        format!(
            "FLAGGED (not in the published table): {}",
            flagged.join(", ")
        )
    };
    Ok(format!(
        "{checked} cells with m, n >= 4 through 8x13 in {total:.2?}; {flags}"
    ))
}

fn oracle() -> Outcome {
    let start = Instant::now();
    for (m, n) in [(3, 3), (3, 4)] {
        let bad = common::oracle_disagreements(m, n);
        if let Some(p) = bad.first() {
            return Err(format!("{m}x{n}: {} disagreements, first {p}", bad.len()));
        }
    }
    within(start.elapsed(), Duration::from_secs(30), "oracle")?;
    Ok(format!(
        "every placement on 3x3 and 3x4 agrees with forward search ({:.2?})",
        start.elapsed()
    ))
}

fn rules() -> Outcome {
    for k in 3..=13 {
        for d in [dims(2, k), dims(k, 2)] {
            let tb = Tablebase::build(d);
            let mates = tb
                .legal_positions()
                .filter(|(p, _)| p.classify(d).unwrap() == TerminalKind::Checkmate)
                .count();
            if mates > 0 || tb.meta().wins > 0 {
                return Err(format!("{d}: {mates} mates, {} wins", tb.meta().wins));
            }
        }
    }
    for (m, n) in [(4, 4), (3, 5)] {
        let d = dims(m, n);
        let tb = Tablebase::build(d);
        let flipped = Tablebase::build(d.transposed());
        for (pos, v) in tb.legal_positions() {
            for sym in [
                Symmetry::MirrorCols,
                Symmetry::MirrorRows,
                Symmetry::Transpose,
            ] {
                let image = pos.transform(sym, d);
                let other = if sym == Symmetry::Transpose {
                    &flipped
                } else {
                    &tb
                };
                if other.value(&image).unwrap() != v {
                    return Err(format!("{d}: {pos} and its {sym:?} image differ"));
                }
            }
        }
    }
    let tb = Tablebase::build(dims(3, 4));
    for (pos, v) in tb.legal_positions() {
        if let Some(p) = v.plies() {
            if (p % 2 == 1) != (pos.stm == Side::White) {
                return Err(format!("3x4: {pos} wins in {p} plies"));
            }
        }
    }
    Ok(
        "no mate on 2-wide boards up to 13; symmetric values on 4x4 and 3x5; ply parity on 3x4"
            .into(),
    )
}

type Corruption = fn(&mut Vec<u8>);

fn persistence() -> Outcome {
    for (m, n) in [(3, 8), (5, 5)] {
        let tb = Tablebase::build(dims(m, n));
        let mut first = Vec::new();
        tb.save(&mut first).unwrap();
        let back = Tablebase::load(&first[..]).map_err(|e| e.to_string())?;
        let mut second = Vec::new();
        back.save(&mut second).unwrap();
        if first != second || back != tb {
            return Err(format!("{m}x{n}: round trip differs"));
        }
    }
    let mut bytes = Vec::new();
    Tablebase::build(dims(3, 8)).save(&mut bytes).unwrap();
    let corruptions: [(&str, Corruption); 4] = [
        ("magic", |b| b[0] = b'X'),
        ("version", |b| b[4] = 9),
        ("reserved", |b| b[HEADER_LEN - 1] = 1),
        ("length", |b| b.truncate(b.len() - 2)),
    ];
    for (what, corrupt) in corruptions {
        let mut bad = bytes.clone();
        corrupt(&mut bad);
        match Tablebase::load(&bad[..]) {
            Err(Error::Format(_)) | Err(Error::Io(_)) => {}
            other => {
                return Err(format!(
                    "corrupt {what} not rejected: {:?}",
                    other.map(|t| t.dims())
                ))
            }
        }
    }
    Ok("3x8 and 5x5 round-trip byte-identical; corrupt magic, version, reserved field and length rejected".into())
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("PASS {id} {name}: {detail}"),
        Err(detail) => {
            failed += 1;
            println!("FAIL {id} {name}: {detail}");
        }
    };
    let grid = grid();
    report(1, "published maxima", table_one(&grid));
    report(2, "3xn bound n+2", three_by_n());
    report(3, "3x12 claim sweep", claim_sweep());
    report(4, "rook-row and mirror invariance", invariance());
    report(5, "proof pipeline", proof());
    report(6, "m+n conjecture", conjecture(&grid));
    report(7, "oracle equivalence", oracle());
    report(8, "rules properties", rules());
    report(9, "persistence", persistence());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
