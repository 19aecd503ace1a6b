use std::path::Path;

use moore_cli::{run_moore, run_subst, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE};
use moore_core::{emit_machine, equivalent, parse_machine, parse_subst};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn moore(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_moore(std::iter::once("moore").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn subst(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_subst(std::iter::once("subst").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("min.moore");
    let example = fixture("example.moore");
    let (code, stdout, _) = moore(&["minimize", &example, "-o", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    let (_, direct, _) = moore(&["minimize", &example]);
    assert_eq!(written, direct);

    // the written file is a valid input again
    let (code, stdout, _) = moore(&["equiv", &example, path.to_str().unwrap()]);
    assert_eq!((code, stdout.as_str()), (EXIT_OK, "equivalent\n"));
}

#[test]
fn unwritable_output_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("no/such/dir/out.txt");
    let (code, _, err) = moore(&["validate", &fixture("example.moore"), "-o", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(!err.is_empty());
}

#[test]
fn help_and_version_succeed() {
    for args in [&["--help"][..], &["--version"], &["minimize", "--help"]] {
        let (code, out, _) = moore(args);
        assert_eq!(code, EXIT_OK, "{args:?}");
        assert!(!out.is_empty());
    }
    let (code, out, _) = subst(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("psi"));
}

#[test]
fn dual_output_reparses_to_dual_machine() {
    let (code, text, _) = moore(&["dual", &fixture("example.moore")]);
    assert_eq!(code, EXIT_OK);
    let d = parse_machine(&text).unwrap();
    assert_eq!(d.state_count(), 4);
    let reference = parse_machine(&std::fs::read_to_string(fixture("dual4.moore")).unwrap()).unwrap();
    assert!(equivalent(&d, &reference).unwrap().is_equivalent());
}

#[test]
fn to_machine_output_reparses() {
    let (code, text, _) = subst(&["to-machine", &fixture("fib.subst")]);
    assert_eq!(code, EXIT_OK);
    let m = parse_machine(&text).unwrap();
    assert_eq!(emit_machine(&m), text);
    assert_eq!(m.state_count(), 3);
}

#[test]
fn minimized_substitution_reparses() {
    let (code, text, _) = subst(&["minimize", &fixture("tm3.subst")]);
    assert_eq!(code, EXIT_OK);
    let f = parse_subst(&text).unwrap();
    assert_eq!(f.substitution.letters().len(), 2);
}

#[test]
fn letter_walks_fixed_point() {
    let fib = fixture("fib.subst");
    let (_, prefix, _) = subst(&["expand", &fib, "-n", "21"]);
    for (n, expected) in prefix.trim().chars().enumerate() {
        let (code, got, _) = subst(&["letter", &fib, "-k", "6", "-n", &n.to_string()]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(got.trim(), expected.to_string(), "n = {n}");
    }
}

#[test]
fn psi_routes_agree() {
    let fib = fixture("fib.subst");
    for n in 0..30 {
        let n = n.to_string();
        let (_, counted, _) = subst(&["psi", &fib, "-n", &n]);
        let (_, scanned, _) = subst(&["psi", &fib, "-n", &n, "--scan"]);
        assert_eq!(counted, scanned, "n = {n}");
    }
}

#[test]
fn psi_scan_bound_is_reported() {
    let (code, _, err) = subst(&["psi", &fixture("fib.subst"), "-n", "50", "--scan", "--bound", "10"]);
    assert_eq!(code, EXIT_DOMAIN);
    assert!(!err.is_empty());
}

#[test]
fn phi_needs_a_base() {
    let (code, _, _) = subst(&["phi", "--word", "101"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, out, _) = subst(&["phi", "--word", "12", "-q", "3"]);
    assert_eq!((code, out.as_str()), (EXIT_OK, "7\n"));
}

#[test]
fn parse_errors_carry_locations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.moore");
    std::fs::write(&path, "moore v1\ninputs 2\noutputs 0\nstate s\n").unwrap();
    let (code, _, err) = moore(&["validate", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn run_reports_both_sides() {
    let example = fixture("example.moore");
    let (_, right, _) = moore(&["run", &example, "--word", "01"]);
    let (_, left, _) = moore(&["run", &example, "--word", "10", "--side", "left"]);
    assert_eq!(right, left);
}
