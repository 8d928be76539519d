//! DIMACS CNF text and solver-output conventions.
//!
//! Output format written by [`write_dimacs`]:
//!
//! ```text
//! c tilerange grid <width> <height> tiles <tiles> selectors <n> counters <n>
//! c primary var = 1 + (row * width + col) * tiles + tile
//! p cnf <vars> <clauses>
//! <lit> <lit> ... 0
//! ```
//!
//! The two comment lines appear only for instances produced by the task
//! encoder. Solver output is read in the SAT-competition style: an
//! `s SATISFIABLE` / `s UNSATISFIABLE` / `s UNKNOWN` status line and `v` lines
//! listing signed literals terminated by `0`.

use std::fmt::Write as _;

use crate::encoder::{CnfInstance, Lit, Model};
use crate::error::{Error, Result};

pub fn write_dimacs(cnf: &CnfInstance) -> String {
    let mut out = String::new();
    if let Some(vm) = &cnf.var_map {
        let _ = writeln!(
            out,
            "c tilerange grid {} {} tiles {} selectors {} counters {}",
            vm.width, vm.height, vm.tiles, vm.selector_vars, vm.counter_vars
        );
        let _ = writeln!(out, "c primary var = 1 + (row * width + col) * tiles + tile");
    }
    let _ = writeln!(out, "p cnf {} {}", cnf.var_count, cnf.clauses.len());
    for clause in &cnf.clauses {
        for lit in clause {
            let _ = write!(out, "{lit} ");
        }
        out.push_str("0\n");
    }
    out
}

/// Parses DIMACS CNF text. Comment lines are skipped; clauses may span lines.
pub fn parse_dimacs(text: &str) -> Result<CnfInstance> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["p", "cnf", v, c] => {
                    let v = v.parse().map_err(|_| Error::Dimacs(format!("line {}: bad var count", n + 1)))?;
                    let c = c.parse().map_err(|_| Error::Dimacs(format!("line {}: bad clause count", n + 1)))?;
                    header = Some((v, c));
                }
                _ => return Err(Error::Dimacs(format!("line {}: malformed header", n + 1))),
            }
            continue;
        }
        if header.is_none() {
            return Err(Error::Dimacs(format!("line {}: clause before header", n + 1)));
        }
        for tok in line.split_whitespace() {
            let lit: Lit = tok.parse().map_err(|_| Error::Dimacs(format!("line {}: bad literal {tok:?}", n + 1)))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
            }
        }
    }
    let (vars, count) = header.ok_or_else(|| Error::Dimacs("missing header".into()))?;
    if !current.is_empty() {
        return Err(Error::Dimacs("last clause is not 0-terminated".into()));
    }
    if clauses.len() != count {
        return Err(Error::Dimacs(format!("header declares {count} clauses, found {}", clauses.len())));
    }
    let cnf = CnfInstance::new(vars, clauses);
    cnf.validate()?;
    Ok(cnf)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExternalAnswer {
    Sat(Model),
    Unsat,
    Unknown,
}

/// Reads a solver's stdout. Every variable in `1..=var_count` must be given a
/// value when the status is SATISFIABLE.
pub fn parse_external_model(text: &str, var_count: usize) -> Result<ExternalAnswer> {
    let mut status = None;
    let mut values: Vec<Option<bool>> = vec![None; var_count];
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            status = Some(match rest.trim() {
                "SATISFIABLE" => ExternalAnswer::Sat(Vec::new()),
                "UNSATISFIABLE" => ExternalAnswer::Unsat,
                "UNKNOWN" | "INDETERMINATE" => ExternalAnswer::Unknown,
                other => return Err(Error::ExternalSolver(format!("unrecognized status {other:?}"))),
            });
        } else if let Some(rest) = line.strip_prefix('v') {
            for tok in rest.split_whitespace() {
                let lit: i64 =
                    tok.parse().map_err(|_| Error::ExternalSolver(format!("bad value literal {tok:?}")))?;
                if lit == 0 {
                    continue;
                }
                let v = lit.unsigned_abs() as usize;
                if v > var_count {
                    return Err(Error::ExternalSolver(format!("value for unknown variable {v}")));
                }
                values[v - 1] = Some(lit > 0);
            }
        }
    }
    match status {
        Some(ExternalAnswer::Sat(_)) => {
            let model: Option<Model> = values.into_iter().collect();
            model
                .map(ExternalAnswer::Sat)
                .ok_or_else(|| Error::ExternalSolver("incomplete model".into()))
        }
        Some(other) => Ok(other),
        None => Err(Error::ExternalSolver("no status line".into())),
    }
}
