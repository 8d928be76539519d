use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::time::Duration;

use tilerange::encoder::CnfInstance;
use tilerange::error::Error;
use tilerange::solver::{ExternalSolver, SolveOutcome};

fn script(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path
}

fn instance() -> CnfInstance {
    CnfInstance::new(2, vec![vec![1, -2], vec![1]])
}

fn run(dir: &Path, name: &str, body: &str, deadline: Option<Duration>) -> tilerange::Result<SolveOutcome> {
    let path = script(dir, name, body);
    ExternalSolver::new(path.display().to_string()).solve(&instance(), deadline).map(|s| s.outcome)
}

#[test]
fn sat_answer_is_verified() {
    let dir = tempfile::tempdir().unwrap();
    // the instance file arrives as the last argument
    let body = "grep -q '^p cnf 2 2' \"$1\" || exit 1\necho 's SATISFIABLE'\necho 'v 1 -2 0'\nexit 10";
    assert_eq!(run(dir.path(), "sat.sh", body, None).unwrap(), SolveOutcome::Sat(vec![true, false]));
}

#[test]
fn bad_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let body = "echo 's SATISFIABLE'\necho 'v -1 -2 0'\nexit 10";
    assert!(matches!(run(dir.path(), "bad.sh", body, None), Err(Error::ExternalSolver(_))));
}

#[test]
fn unsat_and_unknown() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), "unsat.sh", "echo 's UNSATISFIABLE'\nexit 20", None).unwrap(), SolveOutcome::Unsat);
    assert_eq!(run(dir.path(), "unknown.sh", "echo 's UNKNOWN'\nexit 0", None).unwrap(), SolveOutcome::Timeout);
}

#[test]
fn deadline_kills_the_process() {
    let dir = tempfile::tempdir().unwrap();
    let start = std::time::Instant::now();
    let out = run(dir.path(), "slow.sh", "sleep 5\necho 's UNSATISFIABLE'", Some(Duration::from_millis(200)));
    assert_eq!(out.unwrap(), SolveOutcome::Timeout);
    assert!(start.elapsed() < Duration::from_secs(3));
}

#[test]
fn crashes_and_missing_programs_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), "crash.sh", "exit 3", None).is_err());
    let missing = ExternalSolver::new("/definitely/not/a/solver").solve(&instance(), None);
    assert!(matches!(missing, Err(Error::ExternalSolver(_))));
    assert!(ExternalSolver::new("  ").solve(&instance(), None).is_err());
}
