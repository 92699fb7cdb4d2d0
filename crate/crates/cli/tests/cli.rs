use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn krk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krk"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Value of `key=...` in the machine-readable part of the output.
fn key(out: &Output, key: &str) -> Option<String> {
    let prefix = format!("{key}=");
    stdout(out)
        .lines()
        .find_map(|l| l.strip_prefix(&prefix).map(str::to_string))
}

fn built(dir: &Path, m: u32, n: u32) -> PathBuf {
    let path = dir.join(format!("tb{m}{n}.rktb"));
    let out = krk(&[
        "build",
        &m.to_string(),
        &n.to_string(),
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

#[test]
fn build_writes_file_and_reports_max() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tb38.rktb");
    let out = krk(&["build", "3", "8", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(key(&out, "max_dtm").as_deref(), Some("10"));
    assert_eq!(
        std::fs::metadata(&path).unwrap().len(),
        14 + 2 * 24 * 24 * 25 * 2
    );
}

#[test]
fn build_on_two_wide_board_reports_no_wins() {
    let dir = tempfile::tempdir().unwrap();
    let out = krk(&["build", "2", "9", dir.path().join("t").to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("no wins"));
    assert_eq!(key(&out, "max_dtm").as_deref(), Some("none"));
}

#[test]
fn degenerate_board_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = krk(&["build", "0", "5", dir.path().join("t").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("t").exists());
}

#[test]
fn query_reports_value_and_best_move() {
    let dir = tempfile::tempdir().unwrap();
    let tb = built(dir.path(), 3, 8);
    let tb = tb.to_str().unwrap();
    let out = krk(&["query", tb, "3x8 WKa3 WRa1 BKa6 w"]);
    assert!(out.status.success());
    assert_eq!(key(&out, "value").as_deref(), Some("win"));
    let moves: u32 = key(&out, "moves").unwrap().parse().unwrap();
    assert!(moves <= 6);
    assert!(key(&out, "best").is_some());

    let mate = krk(&["query", tb, "3x8 WKc3 WRa1 BKa3 b"]);
    assert!(stdout(&mate).contains("mate, 0"));
    assert_eq!(key(&mate, "value").as_deref(), Some("mate"));

    let overlap = krk(&["query", tb, "3x8 WKa1 WRa1 BKa6 w"]);
    assert_eq!(overlap.status.code(), Some(2));
    let wrong_board = krk(&["query", tb, "4x8 WKa3 WRa1 BKa6 w"]);
    assert_eq!(wrong_board.status.code(), Some(2));
}

#[test]
fn bestline_reaches_checkmate() {
    let dir = tempfile::tempdir().unwrap();
    let tb = built(dir.path(), 3, 8);
    let out = krk(&["bestline", tb.to_str().unwrap(), "3x8 WKb2 WRc1 BKb7 w"]);
    assert!(out.status.success());
    let moves: usize = key(&out, "moves").unwrap().parse().unwrap();
    let line = key(&out, "line").unwrap();
    assert_eq!(line.split(' ').count(), 2 * moves - 1);
    assert!(stdout(&out).contains("(checkmate)"));
}

#[test]
fn table_reproduces_reference_rows() {
    let out = krk(&["table", "--rows", "3-5", "--cols", "3-8"]);
    assert!(out.status.success());
    let expected = [
        (3, [3, 5, 7, 8, 9, 10].as_slice()),
        (4, [7, 9, 10, 11, 12].as_slice()),
        (5, [10, 11, 12, 13].as_slice()),
    ];
    for (m, values) in expected {
        for (k, v) in values.iter().enumerate() {
            let n = m + k as u32;
            assert_eq!(
                key(&out, &format!("u_{m}_{n}")),
                Some(v.to_string()),
                "{m}x{n}"
            );
        }
    }
    assert_eq!(key(&out, "unreported").as_deref(), Some(""));
    assert!(stdout(&out)
        .lines()
        .any(|l| l.trim_start().starts_with("4    -")));
}

#[test]
fn table_marks_unreported_cells_and_normalizes() {
    let out = krk(&["table", "--rows", "6", "--cols", "9"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("15*"));
    assert_eq!(key(&out, "unreported").as_deref(), Some("6x9"));
    let swapped = krk(&["table", "--rows", "9", "--cols", "6"]);
    assert!(stdout(&swapped).contains("swapped"));
    assert_eq!(key(&swapped, "u_6_9").as_deref(), Some("15"));
}

#[test]
fn table_respects_budget() {
    let out = krk(&["table", "--rows", "20", "--cols", "21"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn conjecture_holds_on_small_boards() {
    let out = krk(&["conjecture", "--rows", "4-5", "--cols", "4-8"]);
    assert!(out.status.success());
    assert_eq!(key(&out, "holds").as_deref(), Some("true"));
    assert_eq!(key(&out, "checked").as_deref(), Some("9"));
    assert!(stdout(&out).contains("4x4: 7 = expected"));
}

#[test]
fn conjecture_extended_cells_are_reported() {
    let out = krk(&["conjecture", "--rows", "6", "--cols", "10"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("6x10: 16 = expected (not in the reference table)"));
}

#[test]
fn family_verify_finds_no_violations() {
    let out = krk(&["family-verify", "12"]);
    assert!(out.status.success());
    assert_eq!(key(&out, "violations").as_deref(), Some("0"));
    assert_eq!(key(&out, "beyond_n_plus_2").as_deref(), Some("0"));
}

#[test]
fn prove_certifies_and_perturbation_does_not() {
    let out = krk(&["prove", "10"]);
    assert!(out.status.success());
    assert_eq!(key(&out, "certified").as_deref(), Some("true"));
    assert!(stdout(&out).contains("Base case"));

    let lowered = krk(&["prove", "10", "--perturb"]);
    assert_eq!(lowered.status.code(), Some(1));
    assert_eq!(key(&lowered, "certified").as_deref(), Some("false"));
    assert_eq!(key(&lowered, "base_ok").as_deref(), Some("false"));

    assert_eq!(
        krk(&["prove", "10", "--perturb", "abc"]).status.code(),
        Some(2)
    );
}

#[test]
fn play_session_ends_in_mate() {
    let dir = tempfile::tempdir().unwrap();
    let tb = built(dir.path(), 3, 8);
    let mut child = Command::new(env!("CARGO_BIN_EXE_krk"))
        .args(["play", tb.to_str().unwrap(), "3x8 WKc3 WRb1 BKa3 w"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"Kb3\nRa1\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("checkmate, 1 move"), "{text}");
    assert!(text.contains("illegal move: Kb3"), "{text}");
}
