//! Prioritized exploration of the expressive-range grid and the unconstrained
//! random baseline.
//!
//! The scheduler repeatedly targets a least-populated cell that is not
//! blocklisted, asks a [`Generator`] for a level inside that cell's bins, and
//! re-verifies every success before counting it. Failures and timeouts
//! blocklist the cell, as does reaching the per-cell threshold. All choices
//! (cells and per-attempt solver seeds) come from one seeded stream, so
//! single-worker runs are reproducible apart from elapsed times.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{parse_level, TileCatalog, TileGrid};
use crate::encoder::{decode, encode_task, CountBounds};
use crate::error::{Error, Result};
use crate::metrics::{bin_cell, density, difficulty, AxesSpec, BinRange, CellKey};
use crate::patterns::{check_grid, RuleSet, TemplateKind};
use crate::solver::{self, verify_model, ExternalSolver, SolveOutcome};

pub const DEFAULT_THRESHOLD: usize = 10;
pub const DEFAULT_BUDGET_SECS: f64 = 43_200.0;
pub const DEFAULT_ATTEMPT_TIMEOUT_SECS: f64 = 900.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failed,
    TimedOut,
}

/// One line of the attempt log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    /// Targeted cell; for baseline attempts, the cell the level landed in.
    pub cell: Option<CellKey>,
    pub template: TemplateKind,
    pub seed: u64,
    pub outcome: Outcome,
    pub elapsed: f64,
    /// Level rows, present on success.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<usize>,
}

impl AttemptRecord {
    pub fn grid(&self, catalog: &TileCatalog) -> Option<Result<TileGrid>> {
        self.level.as_ref().map(|rows| parse_level(&rows.join("\n"), catalog))
    }

    /// Same record without timing, for determinism comparisons.
    pub fn untimed(&self) -> AttemptRecord {
        AttemptRecord { elapsed: 0.0, ..self.clone() }
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Parses a JSONL attempt log; blank lines are skipped.
pub fn read_log(text: &str) -> Result<Vec<AttemptRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

pub enum GenOutcome {
    Level(TileGrid),
    Unsat,
    Timeout,
}

/// Something that produces levels, optionally aimed at a pair of bins.
pub trait Generator: Sync {
    fn template(&self) -> TemplateKind;

    /// Rules every produced level must satisfy, if any.
    fn rules(&self) -> Option<&RuleSet>;

    fn generate(&self, target: Option<(BinRange, BinRange)>, seed: u64, timeout: Option<Duration>)
        -> Result<GenOutcome>;
}

/// The constraint-based generator: encode, solve, decode.
pub struct SatGenerator<'a> {
    pub width: usize,
    pub height: usize,
    pub ruleset: &'a RuleSet,
    pub catalog: &'a TileCatalog,
    pub external: Option<ExternalSolver>,
}

impl<'a> SatGenerator<'a> {
    pub fn new(width: usize, height: usize, ruleset: &'a RuleSet, catalog: &'a TileCatalog) -> Self {
        SatGenerator { width, height, ruleset, catalog, external: None }
    }
}

impl Generator for SatGenerator<'_> {
    fn template(&self) -> TemplateKind {
        self.ruleset.kind
    }

    fn rules(&self) -> Option<&RuleSet> {
        Some(self.ruleset)
    }

    fn generate(
        &self,
        target: Option<(BinRange, BinRange)>,
        seed: u64,
        timeout: Option<Duration>,
    ) -> Result<GenOutcome> {
        let (d, h) = match target {
            Some((d, h)) => (Some(CountBounds::from_bin(d)), Some(CountBounds::from_bin(h))),
            None => (None, None),
        };
        let cnf = encode_task(self.width, self.height, self.ruleset, self.catalog, d, h)?;
        let solved = match &self.external {
            Some(ext) => ext.solve(&cnf, timeout)?,
            None => solver::solve(&cnf, seed, timeout)?,
        };
        match solved.outcome {
            SolveOutcome::Sat(model) => {
                if !verify_model(&cnf, &model)? {
                    return Err(Error::MalformedInstance("solver returned a non-model".into()));
                }
                let var_map = cnf.var_map.as_ref().expect("encode_task sets a variable map");
                Ok(GenOutcome::Level(decode(&model, var_map)?))
            }
            SolveOutcome::Unsat => Ok(GenOutcome::Unsat),
            SolveOutcome::Timeout => Ok(GenOutcome::Timeout),
        }
    }
}

pub struct ExplorationState {
    pub axes: AxesSpec,
    pub counts: BTreeMap<CellKey, usize>,
    pub blocklist: BTreeSet<CellKey>,
    pub threshold: usize,
    pub rng: ChaCha8Rng,
    pub budget: Duration,
    pub attempt_timeout: Duration,
    /// Stop after this many attempts even if budget remains.
    pub max_attempts: Option<usize>,
    pub spent: Duration,
    pub attempts: usize,
}

/// Counts the corpus per cell and blocklists cells already at the threshold.
pub fn init_state(
    segments: &[TileGrid],
    catalog: &TileCatalog,
    axes: AxesSpec,
    threshold: usize,
    budget: Duration,
    attempt_timeout: Duration,
    seed: u64,
) -> Result<ExplorationState> {
    axes.validate()?;
    let mut counts: BTreeMap<CellKey, usize> = axes.cells().map(|c| (c, 0)).collect();
    for seg in segments {
        if let Some(cell) = bin_cell(density(seg, catalog), difficulty(seg, catalog), &axes) {
            *counts.entry(cell).or_default() += 1;
        }
    }
    let blocklist = counts.iter().filter(|(_, &n)| n >= threshold).map(|(&c, _)| c).collect();
    Ok(ExplorationState {
        axes,
        counts,
        blocklist,
        threshold,
        rng: ChaCha8Rng::seed_from_u64(seed),
        budget,
        attempt_timeout,
        max_attempts: None,
        spent: Duration::ZERO,
        attempts: 0,
    })
}

/// Uniform choice among the eligible cells with the fewest levels, or `None`
/// when every cell is blocklisted.
pub fn select_cell(state: &mut ExplorationState) -> Option<CellKey> {
    select_excluding(state, &BTreeSet::new())
}

fn select_excluding(state: &mut ExplorationState, taken: &BTreeSet<CellKey>) -> Option<CellKey> {
    let eligible = state
        .counts
        .iter()
        .filter(|(c, _)| !state.blocklist.contains(c) && !taken.contains(c));
    let min = eligible.clone().map(|(_, &n)| n).min()?;
    let ties: Vec<CellKey> = eligible.filter(|(_, &n)| n == min).map(|(&c, _)| c).collect();
    Some(ties[state.rng.gen_range(0..ties.len())])
}

/// Runs one generation attempt without touching the scheduler state.
fn attempt(
    generator: &dyn Generator,
    catalog: &TileCatalog,
    axes: &AxesSpec,
    cell: CellKey,
    seed: u64,
    timeout: Duration,
) -> Result<AttemptRecord> {
    let start = Instant::now();
    let ranges = axes.ranges(cell);
    let generated = generator.generate(Some(ranges), seed, Some(timeout))?;
    let mut record = AttemptRecord {
        cell: Some(cell),
        template: generator.template(),
        seed,
        outcome: Outcome::Failed,
        elapsed: 0.0,
        level: None,
        density: None,
        difficulty: None,
    };
    match generated {
        GenOutcome::Level(grid) => {
            let (d, h) = (density(&grid, catalog), difficulty(&grid, catalog));
            if !ranges.0.contains(d) || !ranges.1.contains(h) {
                return Err(Error::BinMismatch { cell: axes.label(cell), density: d, difficulty: h });
            }
            if let Some(rules) = generator.rules() {
                let violations = check_grid(&grid, rules).len();
                if violations > 0 {
                    return Err(Error::PatternMismatch { cell: axes.label(cell), violations });
                }
            }
            record.outcome = Outcome::Success;
            record.level = Some(grid.render(catalog).lines().map(str::to_owned).collect());
            record.density = Some(d);
            record.difficulty = Some(h);
        }
        GenOutcome::Unsat => record.outcome = Outcome::Failed,
        GenOutcome::Timeout => record.outcome = Outcome::TimedOut,
    }
    record.elapsed = start.elapsed().as_secs_f64();
    Ok(record)
}

fn apply(state: &mut ExplorationState, record: &AttemptRecord) {
    let cell = record.cell.expect("targeted attempts carry a cell");
    state.attempts += 1;
    state.spent += Duration::from_secs_f64(record.elapsed);
    match record.outcome {
        Outcome::Success => {
            let n = state.counts.entry(cell).or_default();
            *n += 1;
            if *n >= state.threshold {
                state.blocklist.insert(cell);
            }
        }
        Outcome::Failed | Outcome::TimedOut => {
            state.blocklist.insert(cell);
        }
    }
}

fn attempt_timeout(state: &ExplorationState) -> Duration {
    state.attempt_timeout.min(state.budget.saturating_sub(state.spent))
}

/// Attempts `cell` with a fresh seed from the state's stream and records the result.
pub fn run_attempt(
    state: &mut ExplorationState,
    cell: CellKey,
    generator: &dyn Generator,
    catalog: &TileCatalog,
) -> Result<AttemptRecord> {
    let seed = state.rng.next_u64();
    let record = attempt(generator, catalog, &state.axes, cell, seed, attempt_timeout(state))?;
    apply(state, &record);
    Ok(record)
}

fn has_budget(state: &ExplorationState) -> bool {
    state.spent < state.budget && state.max_attempts.is_none_or(|m| state.attempts < m)
}

/// Explores until the budget (or attempt cap) is used up or no cell is
/// eligible. `sink` sees each record as soon as it exists.
pub fn explore(
    state: &mut ExplorationState,
    generator: &dyn Generator,
    catalog: &TileCatalog,
    mut sink: impl FnMut(&AttemptRecord) -> Result<()>,
) -> Result<Vec<AttemptRecord>> {
    let mut log = Vec::new();
    while has_budget(state) {
        let Some(cell) = select_cell(state) else { break };
        let record = run_attempt(state, cell, generator, catalog)?;
        sink(&record)?;
        log.push(record);
    }
    Ok(log)
}

/// Pool variant of [`explore`]: each round selects up to `workers` distinct
/// cells, runs them concurrently and applies the results in selection order.
pub fn explore_parallel(
    state: &mut ExplorationState,
    generator: &dyn Generator,
    catalog: &TileCatalog,
    workers: usize,
    mut sink: impl FnMut(&AttemptRecord) -> Result<()>,
) -> Result<Vec<AttemptRecord>> {
    if workers <= 1 {
        return explore(state, generator, catalog, sink);
    }
    let mut log = Vec::new();
    while has_budget(state) {
        let room = state.max_attempts.map_or(workers, |m| workers.min(m - state.attempts));
        let mut batch = Vec::new();
        let mut taken = BTreeSet::new();
        while batch.len() < room {
            let Some(cell) = select_excluding(state, &taken) else { break };
            taken.insert(cell);
            batch.push((cell, state.rng.next_u64()));
        }
        if batch.is_empty() {
            break;
        }
        let timeout = attempt_timeout(state);
        let axes = state.axes;
        let results: Vec<Result<AttemptRecord>> = std::thread::scope(|s| {
            let handles: Vec<_> = batch
                .iter()
                .map(|&(cell, seed)| s.spawn(move || attempt(generator, catalog, &axes, cell, seed, timeout)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("attempt worker panicked")).collect()
        });
        for result in results {
            let record = result?;
            apply(state, &record);
            sink(&record)?;
            log.push(record);
        }
    }
    Ok(log)
}

/// `n` unconstrained generations with seeds drawn from `seed`.
pub fn random_baseline(
    n: usize,
    generator: &dyn Generator,
    catalog: &TileCatalog,
    axes: &AxesSpec,
    seed: u64,
    timeout: Option<Duration>,
    mut sink: impl FnMut(&AttemptRecord) -> Result<()>,
) -> Result<Vec<AttemptRecord>> {
    if n == 0 {
        return Err(Error::Config("baseline needs at least one attempt".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log = Vec::with_capacity(n);
    for _ in 0..n {
        let attempt_seed = rng.next_u64();
        let start = Instant::now();
        let mut record = AttemptRecord {
            cell: None,
            template: generator.template(),
            seed: attempt_seed,
            outcome: Outcome::Failed,
            elapsed: 0.0,
            level: None,
            density: None,
            difficulty: None,
        };
        match generator.generate(None, attempt_seed, timeout)? {
            GenOutcome::Level(grid) => {
                if let Some(rules) = generator.rules() {
                    let violations = check_grid(&grid, rules).len();
                    if violations > 0 {
                        return Err(Error::PatternMismatch { cell: "baseline".into(), violations });
                    }
                }
                let (d, h) = (density(&grid, catalog), difficulty(&grid, catalog));
                record.outcome = Outcome::Success;
                record.cell = bin_cell(d, h, axes);
                record.level = Some(grid.render(catalog).lines().map(str::to_owned).collect());
                record.density = Some(d);
                record.difficulty = Some(h);
            }
            GenOutcome::Unsat => {}
            GenOutcome::Timeout => record.outcome = Outcome::TimedOut,
        }
        record.elapsed = start.elapsed().as_secs_f64();
        sink(&record)?;
        log.push(record);
    }
    Ok(log)
}

/// Cells that received at least one successful level, by measured metrics.
pub fn coverage(log: &[AttemptRecord], axes: &AxesSpec) -> BTreeSet<CellKey> {
    log.iter()
        .filter(|r| r.outcome == Outcome::Success)
        .filter_map(|r| bin_cell(r.density?, r.difficulty?, axes))
        .collect()
}

/// File name for a generated level, e.g. `d60-75_h12-15_s42.txt`.
pub fn level_file_name(axes: &AxesSpec, cell: CellKey, seed: u64) -> String {
    format!("{}_s{seed}.txt", axes.label(cell))
}
