//! Deciding CNF instances: the built-in CDCL engine, model verification and
//! a bridge to external DIMACS solvers.

mod cdcl;
pub mod dimacs;
pub mod external;

use std::time::{Duration, Instant};

use crate::encoder::{lit_value, CnfInstance, Model};
use crate::error::{Error, Result};

pub use dimacs::{parse_dimacs, parse_external_model, write_dimacs, ExternalAnswer};
pub use external::ExternalSolver;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat(Model),
    Unsat,
    Timeout,
}

impl SolveOutcome {
    pub fn model(&self) -> Option<&Model> {
        match self {
            SolveOutcome::Sat(m) => Some(m),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solved {
    pub outcome: SolveOutcome,
    pub elapsed: Duration,
    pub conflicts: u64,
}

/// Decides `cnf`. Branching order and polarity derive from `seed`, so equal
/// `(cnf, seed)` pairs give equal answers when no deadline interrupts.
pub fn solve(cnf: &CnfInstance, seed: u64, deadline: Option<Duration>) -> Result<Solved> {
    cnf.validate()?;
    let start = Instant::now();
    let stop = deadline.map(|d| start + d);
    let mut engine = cdcl::Cdcl::new(cnf.var_count, &cnf.clauses, seed);
    let outcome = match engine.solve(stop) {
        cdcl::Answer::Sat(model) => {
            debug_assert!(verify_model(cnf, &model).unwrap_or(false));
            SolveOutcome::Sat(model)
        }
        cdcl::Answer::Unsat => SolveOutcome::Unsat,
        cdcl::Answer::Timeout => SolveOutcome::Timeout,
    };
    Ok(Solved { outcome, elapsed: start.elapsed(), conflicts: engine.conflicts })
}

/// True iff every clause has a satisfied literal under `model`.
pub fn verify_model(cnf: &CnfInstance, model: &[bool]) -> Result<bool> {
    if model.len() != cnf.var_count {
        return Err(Error::ModelLength { expected: cnf.var_count, found: model.len() });
    }
    Ok(cnf.clauses.iter().all(|c| c.iter().any(|&l| lit_value(model, l))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn inst(n: usize, clauses: &[&[i32]]) -> CnfInstance {
        CnfInstance::new(n, clauses.iter().map(|c| c.to_vec()).collect())
    }

    fn brute_force(cnf: &CnfInstance) -> Vec<Vec<bool>> {
        (0u32..1 << cnf.var_count)
            .map(|m| (0..cnf.var_count).map(|i| m >> i & 1 == 1).collect::<Vec<bool>>())
            .filter(|m| verify_model(cnf, m).unwrap())
            .collect()
    }

    fn random_3sat(rng: &mut ChaCha8Rng, vars: usize, clauses: usize) -> CnfInstance {
        let cs = (0..clauses)
            .map(|_| {
                (0..3)
                    .map(|_| {
                        let v = rng.gen_range(1..=vars as i32);
                        if rng.gen() { v } else { -v }
                    })
                    .collect()
            })
            .collect();
        CnfInstance::new(vars, cs)
    }

    #[test]
    fn trivial_instances() {
        let s = solve(&inst(1, &[&[1]]), 0, None).unwrap();
        assert_eq!(s.outcome, SolveOutcome::Sat(vec![true]));
        let s = solve(&inst(1, &[&[1], &[-1]]), 0, None).unwrap();
        assert_eq!(s.outcome, SolveOutcome::Unsat);
        let s = solve(&inst(3, &[]), 0, None).unwrap();
        assert!(matches!(s.outcome, SolveOutcome::Sat(ref m) if m.len() == 3));
        assert!(solve(&inst(1, &[&[2]]), 0, None).is_err());
    }

    #[test]
    fn matches_enumeration_on_random_3sat() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 0..120 {
            let vars = rng.gen_range(3..=12);
            let ratio = rng.gen_range(2.0..6.0);
            let cnf = random_3sat(&mut rng, vars, (vars as f64 * ratio) as usize);
            let oracle = !brute_force(&cnf).is_empty();
            let got = solve(&cnf, k, None).unwrap();
            match got.outcome {
                SolveOutcome::Sat(ref m) => {
                    assert!(oracle, "instance {k}: solver SAT, oracle UNSAT");
                    assert!(verify_model(&cnf, m).unwrap());
                }
                SolveOutcome::Unsat => assert!(!oracle, "instance {k}: solver UNSAT, oracle SAT"),
                SolveOutcome::Timeout => panic!("no deadline given"),
            }
        }
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 6 pigeons, 5 holes
        let (p, h) = (6, 5);
        let var = |i: usize, j: usize| (i * h + j + 1) as i32;
        let mut cs: Vec<Vec<i32>> = (0..p).map(|i| (0..h).map(|j| var(i, j)).collect()).collect();
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    cs.push(vec![-var(a, j), -var(b, j)]);
                }
            }
        }
        let cnf = CnfInstance::new(p * h, cs);
        assert_eq!(solve(&cnf, 3, None).unwrap().outcome, SolveOutcome::Unsat);
    }

    #[test]
    fn deterministic_per_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let cnf = random_3sat(&mut rng, 40, 120);
        for seed in 0..5 {
            let a = solve(&cnf, seed, None).unwrap().outcome;
            let b = solve(&cnf, seed, None).unwrap().outcome;
            assert_eq!(a, b);
            let c = solve(&cnf, seed, Some(Duration::from_secs(60))).unwrap().outcome;
            assert_eq!(a, c);
        }
    }

    #[test]
    fn seeds_reach_different_models() {
        // no clauses over 4 vars: 16 models
        let cnf = inst(4, &[&[1, 2, 3, 4]]);
        assert_eq!(brute_force(&cnf).len(), 15);
        let models: BTreeSet<Vec<bool>> =
            (0..32).filter_map(|s| solve(&cnf, s, None).unwrap().outcome.model().cloned()).collect();
        assert!(models.len() >= 2, "{} distinct models", models.len());
    }

    #[test]
    fn zero_deadline_times_out_on_hard_instance() {
        let (p, h) = (9, 8);
        let var = |i: usize, j: usize| (i * h + j + 1) as i32;
        let mut cs: Vec<Vec<i32>> = (0..p).map(|i| (0..h).map(|j| var(i, j)).collect()).collect();
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    cs.push(vec![-var(a, j), -var(b, j)]);
                }
            }
        }
        let cnf = CnfInstance::new(p * h, cs);
        let s = solve(&cnf, 0, Some(Duration::from_millis(0))).unwrap();
        assert_eq!(s.outcome, SolveOutcome::Timeout);
    }

    #[test]
    fn verify_model_examples() {
        let cnf = inst(1, &[&[1]]);
        assert!(verify_model(&cnf, &[true]).unwrap());
        assert!(!verify_model(&cnf, &[false]).unwrap());
        assert!(verify_model(&inst(2, &[]), &[false, true]).unwrap());
        assert!(matches!(verify_model(&cnf, &[true, true]), Err(Error::ModelLength { .. })));
    }
}
