//! Runs an external DIMACS solver as a subprocess.
//!
//! The command is split on whitespace; the instance path is appended as the
//! last argument. Stdout is parsed with [`parse_external_model`]. Exit codes
//! 10 (SAT) and 20 (UNSAT) are accepted alongside 0; any other non-zero code
//! without a status line is an error. When the deadline passes, the process is
//! killed and the attempt reports a timeout.

use std::io::Read;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use super::dimacs::{parse_external_model, write_dimacs, ExternalAnswer};
use super::{verify_model, SolveOutcome, Solved};
use crate::encoder::CnfInstance;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct ExternalSolver {
    pub command: String,
}

impl ExternalSolver {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalSolver { command: command.into() }
    }

    pub fn solve(&self, cnf: &CnfInstance, deadline: Option<Duration>) -> Result<Solved> {
        let mut parts = self.command.split_whitespace();
        let program = parts.next().ok_or_else(|| Error::ExternalSolver("empty command".into()))?;
        let mut file = tempfile::Builder::new()
            .prefix("tilerange-")
            .suffix(".cnf")
            .tempfile()
            .map_err(|e| Error::io(std::env::temp_dir(), e))?;
        std::io::Write::write_all(&mut file, write_dimacs(cnf).as_bytes())
            .map_err(|e| Error::io(file.path(), e))?;

        let start = Instant::now();
        let mut child = Command::new(program)
            .args(parts)
            .arg(file.path())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::ExternalSolver(format!("cannot start {program:?}: {e}")))?;
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let reader = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = stdout.read_to_string(&mut s);
            s
        });

        let status = loop {
            if let Some(status) = child.try_wait().map_err(|e| Error::ExternalSolver(e.to_string()))? {
                break Some(status);
            }
            if deadline.is_some_and(|d| start.elapsed() >= d) {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        let elapsed = start.elapsed();
        // a killed wrapper may leave children holding stdout open, so the
        // reader is only joined when the process exited by itself
        let Some(status) = status else {
            return Ok(Solved { outcome: SolveOutcome::Timeout, elapsed, conflicts: 0 });
        };
        let output = reader.join().unwrap_or_default();

        let answer = match parse_external_model(&output, cnf.var_count) {
            Ok(a) => a,
            Err(e) => {
                let code = status.code();
                if !matches!(code, Some(0 | 10 | 20)) {
                    return Err(Error::ExternalSolver(format!("exit status {status}: {e}")));
                }
                return Err(e);
            }
        };
        let outcome = match answer {
            ExternalAnswer::Sat(model) => {
                if !verify_model(cnf, &model)? {
                    return Err(Error::ExternalSolver("returned model does not satisfy the instance".into()));
                }
                SolveOutcome::Sat(model)
            }
            ExternalAnswer::Unsat => SolveOutcome::Unsat,
            ExternalAnswer::Unknown => SolveOutcome::Timeout,
        };
        Ok(Solved { outcome, elapsed, conflicts: 0 })
    }
}
