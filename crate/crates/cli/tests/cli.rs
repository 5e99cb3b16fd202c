use std::path::{Path, PathBuf};
use std::process::Command;

use lamplighter::cli::parse_problem;
use lamplighter::digitset::DigitAutomaton;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn bin(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lamplighter")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn fx(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("lamplighter-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn problem_files_round_trip() {
    let mut seen = 0;
    for e in std::fs::read_dir(fixtures()).unwrap() {
        let path = e.unwrap().path();
        if path.extension().is_some_and(|x| x == "problem") {
            let pf = parse_problem(&std::fs::read_to_string(&path).unwrap()).unwrap();
            let text = pf.serialize();
            assert_eq!(parse_problem(&text).unwrap(), pf, "{}", path.display());
            assert_eq!(parse_problem(&text).unwrap().serialize(), text);
            seen += 1;
        }
    }
    assert!(seen >= 4);
    let a = DigitAutomaton::from_text(&std::fs::read_to_string(fixtures().join("powers_of_two.aut")).unwrap()).unwrap();
    assert!(DigitAutomaton::from_text(&a.to_text()).unwrap().equals(&a).unwrap());
}

#[test]
fn exit_codes_on_the_fixture_suite() {
    let cases = [
        ("knapsack_powers.problem", [0, 0, 0, 0]),
        ("submonoid_lamplighter.problem", [0, 0, 2, 0]),
        ("submonoid_lamplighter_member.problem", [0, 0, 0, 0]),
        ("sunit_two_components.problem", [0, 0, 0, 0]),
    ];
    for (f, codes) in cases {
        for (cmd, want) in ["solve", "reduce", "oracle", "check"].iter().zip(codes) {
            let (code, _) = bin(&[cmd, &fx(f)]);
            assert_eq!(code, want, "{cmd} {f}");
        }
    }
    // a search that cannot reach the target is inconclusive, never a no
    let (code, out) = bin(&["oracle", &fx("submonoid_lamplighter_member.problem"), "--budget", "1,8,8"]);
    assert_eq!((code, out.trim()), (2, "NotFoundWithinBudget"));
    // a binding word cap downgrades the verdict
    let (code, out) = bin(&["solve", &fx("submonoid_lamplighter_member.problem"), "--max-len", "1"]);
    assert_eq!((code, out.trim()), (2, "Unknown"));
}

#[test]
fn errors_exit_with_one() {
    assert_eq!(bin(&["solve", "/nonexistent.problem"]).0, 1);
    assert_eq!(bin(&["oracle", &fx("knapsack_powers.problem"), "--budget", "1,2"]).0, 1);
    assert_eq!(bin(&["frobnicate"]).0, 1);
    assert_eq!(bin(&["--help"]).0, 0);
}

#[test]
fn solve_writes_artifacts_and_automaton_ops_read_them() {
    let dir = scratch("solve");
    let (code, _) = bin(&["solve", &fx("knapsack_powers.problem"), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0);
    for f in ["automaton.aut", "automaton.dot", "report.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "solve");
    let aut = dir.join("automaton.aut");
    let a = aut.to_str().unwrap();
    assert_eq!(bin(&["automaton", "equals", a, a]).1.trim(), "true");
    assert_eq!(bin(&["automaton", "subset", a, a]).1.trim(), "true");
    let (code, out) = bin(&["automaton", "enumerate", a, "--window", "16"]);
    assert_eq!(code, 0);
    let parsed = DigitAutomaton::from_text(&std::fs::read_to_string(&aut).unwrap()).unwrap();
    assert_eq!(out.lines().count(), parsed.enumerate_window(16).len());
    let (code, dot) = bin(&["automaton", "show", a, "--format", "dot"]);
    assert_eq!(code, 0);
    assert!(dot.starts_with("digraph"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn reduce_writes_parseable_intermediates() {
    let dir = scratch("reduce");
    let (code, _) = bin(&["reduce", &fx("submonoid_lamplighter_member.problem"), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0);
    let mut problems = 0;
    for e in std::fs::read_dir(&dir).unwrap() {
        let path = e.unwrap().path();
        if path.extension().is_some_and(|x| x == "problem") {
            parse_problem(&std::fs::read_to_string(&path).unwrap()).unwrap();
            problems += 1;
        }
    }
    assert!(problems > 0);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn json_output_is_valid() {
    for f in ["knapsack_powers.problem", "submonoid_lamplighter.problem", "sunit_two_components.problem"] {
        let (_, out) = bin(&["check", &fx(f), "--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["command"], "check", "{f}");
    }
}
