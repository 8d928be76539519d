mod common;

use std::time::Duration;

use common::StubGenerator;
use proptest::prelude::*;
use tilerange::corpus::TileCatalog;
use tilerange::explorer::{explore, init_state, run_attempt, select_cell, Outcome};
use tilerange::metrics::{AxesSpec, Axis, CellKey};

fn axes(dbins: usize, hbins: usize) -> AxesSpec {
    // minimum 1 on both axes keeps every bin realizable by the stub
    AxesSpec::new(Axis { min: 1, max: 1 + 2 * dbins, bin_width: 2 }, Axis { min: 1, max: 1 + 2 * hbins, bin_width: 2 })
        .unwrap()
}

#[test]
fn stub_three_cells_threshold_two() {
    let cat = TileCatalog::smb();
    let mut st = init_state(&[], &cat, axes(3, 1), 2, Duration::from_secs(60), Duration::from_secs(1), 11).unwrap();
    let log = explore(&mut st, &StubGenerator::new(), &cat, |_| Ok(())).unwrap();
    assert_eq!(log.len(), 6);
    assert!(log.iter().all(|r| r.outcome == Outcome::Success));
    assert_eq!(st.blocklist.len(), 3);
    assert!(st.counts.values().all(|&n| n == 2));
    assert_eq!(select_cell(&mut st), None);
}

#[test]
fn ties_split_evenly() {
    let cat = TileCatalog::smb();
    let mut st = init_state(&[], &cat, axes(2, 1), 10, Duration::ZERO, Duration::ZERO, 2024).unwrap();
    st.counts.insert(CellKey::new(0, 0), 2);
    st.counts.insert(CellKey::new(1, 0), 2);
    let draws = 10_000;
    let first = (0..draws).filter(|_| select_cell(&mut st) == Some(CellKey::new(0, 0))).count();
    let share = first as f64 / draws as f64;
    assert!((share - 0.5).abs() <= 0.02, "share {share}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scheduler_invariants(
        dbins in 1usize..5,
        hbins in 1usize..4,
        threshold in 1usize..5,
        seed in any::<u64>(),
        unsat_mask in any::<u32>(),
        preload in proptest::collection::vec(0usize..6, 20),
    ) {
        let cat = TileCatalog::smb();
        let ax = axes(dbins, hbins);
        let mut stub = StubGenerator::new();
        let cells: Vec<CellKey> = ax.cells().collect();
        for (i, &c) in cells.iter().enumerate() {
            if unsat_mask >> i & 1 == 1 {
                let (d, h) = ax.ranges(c);
                stub.unsat.insert((d.lo, h.lo));
            }
        }
        let mut st = init_state(&[], &cat, ax, threshold, Duration::from_secs(600), Duration::from_secs(1), seed).unwrap();
        // corpus-seeded counts, possibly above the threshold
        for (i, &c) in cells.iter().enumerate() {
            st.counts.insert(c, preload[i % preload.len()]);
            if preload[i % preload.len()] >= threshold {
                st.blocklist.insert(c);
            }
        }
        let initial = st.counts.clone();
        let mut successes = 0;
        let mut decisions = Vec::new();
        while let Some(cell) = select_cell(&mut st) {
            prop_assert!(!st.blocklist.contains(&cell));
            let min = st.counts.iter().filter(|(c, _)| !st.blocklist.contains(c)).map(|(_, &n)| n).min().unwrap();
            prop_assert_eq!(st.counts[&cell], min);
            let rec = run_attempt(&mut st, cell, &stub, &cat).unwrap();
            decisions.push((rec.cell, rec.seed));
            match rec.outcome {
                Outcome::Success => successes += 1,
                _ => prop_assert!(st.blocklist.contains(&cell)),
            }
            prop_assert!(st.counts[&cell] <= threshold.max(initial[&cell]));
        }
        let generated: usize = st.counts.iter().map(|(c, &n)| n - initial[c]).sum();
        prop_assert_eq!(generated, successes);

        // equal seeds, equal decisions
        let mut again = init_state(&[], &cat, ax, threshold, Duration::from_secs(600), Duration::from_secs(1), seed).unwrap();
        again.counts = initial.clone();
        again.blocklist = initial.iter().filter(|(_, &n)| n >= threshold).map(|(&c, _)| c).collect();
        let log = explore(&mut again, &stub, &cat, |_| Ok(())).unwrap();
        let replay: Vec<_> = log.iter().map(|r| (r.cell, r.seed)).collect();
        prop_assert_eq!(replay, decisions);
    }
}

#[test]
fn different_seeds_diverge() {
    let cat = TileCatalog::smb();
    let run = |seed| {
        let mut st = init_state(&[], &cat, axes(4, 3), 3, Duration::from_secs(60), Duration::from_secs(1), seed).unwrap();
        explore(&mut st, &StubGenerator::new(), &cat, |_| Ok(())).unwrap().iter().map(|r| r.cell).collect::<Vec<_>>()
    };
    assert_ne!(run(1), run(2));
    assert_eq!(run(1), run(1));
}
