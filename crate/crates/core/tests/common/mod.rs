//! Independent reference implementations used to check the library.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;
use std::time::Duration;

use tilerange::corpus::{build_corpus, read_level_dir, Category, Corpus, TileCatalog, TileGrid};
use tilerange::encoder::Lit;
use tilerange::error::Result;
use tilerange::explorer::{GenOutcome, Generator};
use tilerange::metrics::BinRange;
use tilerange::pathfind::PhysicsSpec;
use tilerange::patterns::{RuleSet, TemplateKind};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn smb_corpus() -> Corpus {
    let levels = read_level_dir(&data_dir().join("levels")).unwrap();
    build_corpus(&levels, &TileCatalog::smb(), 20, 14, 1).unwrap()
}

// ---------------------------------------------------------------- SAT

fn satisfied(clauses: &[Vec<Lit>], assign: impl Fn(usize) -> bool) -> bool {
    clauses.iter().all(|c| c.iter().any(|&l| assign(l.unsigned_abs() as usize - 1) == (l > 0)))
}

/// Satisfiability by enumerating all `2^n` assignments.
pub fn brute_force_sat(n: usize, clauses: &[Vec<Lit>]) -> bool {
    assert!(n <= 20, "enumeration limited to 20 variables");
    (0u32..1 << n).any(|m| satisfied(clauses, |v| m >> v & 1 == 1))
}

/// Plain DPLL with unit propagation, no learning. Returns a model if one exists.
pub fn dpll(n: usize, clauses: &[Vec<Lit>], fixed: &[Lit]) -> Option<Vec<bool>> {
    fn go(clauses: &[Vec<Lit>], assign: &mut Vec<Option<bool>>) -> bool {
        let mut trail = Vec::new();
        loop {
            let mut changed = false;
            for c in clauses {
                let mut open = None;
                let mut open_count = 0;
                let mut sat = false;
                for &l in c {
                    match assign[l.unsigned_abs() as usize - 1] {
                        Some(v) if v == (l > 0) => {
                            sat = true;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            open = Some(l);
                            open_count += 1;
                        }
                    }
                }
                if sat {
                    continue;
                }
                match (open_count, open) {
                    (0, _) => {
                        for v in trail {
                            assign[v] = None;
                        }
                        return false;
                    }
                    (1, Some(l)) => {
                        let v = l.unsigned_abs() as usize - 1;
                        assign[v] = Some(l > 0);
                        trail.push(v);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                break;
            }
        }
        let Some(v) = assign.iter().position(Option::is_none) else { return true };
        for value in [false, true] {
            assign[v] = Some(value);
            if go(clauses, assign) {
                return true;
            }
        }
        assign[v] = None;
        for t in trail {
            assign[t] = None;
        }
        false
    }
    let mut assign = vec![None; n];
    for &l in fixed {
        let v = l.unsigned_abs() as usize - 1;
        if assign[v] == Some(l < 0) {
            return None;
        }
        assign[v] = Some(l > 0);
    }
    go(clauses, &mut assign).then(|| assign.into_iter().map(|v| v.unwrap()).collect())
}

/// Projections of the models of `clauses` onto variables `1..=k`.
pub fn projected_models(n: usize, clauses: &[Vec<Lit>], k: usize) -> BTreeSet<u32> {
    (0u32..1 << k)
        .filter(|&m| {
            let fixed: Vec<Lit> =
                (0..k).map(|v| if m >> v & 1 == 1 { v as Lit + 1 } else { -(v as Lit + 1) }).collect();
            dpll(n, clauses, &fixed).is_some()
        })
        .collect()
}

// ---------------------------------------------------------------- paths

/// Unit-step player state. Every transition moves one tile (cost 1) except
/// touching down, which costs nothing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum State {
    Ground(isize, isize),
    /// Walked off a ledge and dropping.
    Drop(isize, isize),
    /// Going up; `risen` rows above the takeoff so far.
    Rise { col: isize, row: isize, dir: isize, risen: usize },
    /// Moving sideways at the apex; `moved` columns so far.
    Glide { col: isize, row: isize, dir: isize, moved: usize },
    /// Coming down in the landing column.
    Sink(isize, isize),
}

pub struct World {
    w: isize,
    h: isize,
    open: Vec<bool>,
    solid: Vec<bool>,
    max_h: usize,
    max_span: usize,
}

impl World {
    pub fn new(grid: &TileGrid, catalog: &TileCatalog, physics: &PhysicsSpec) -> Self {
        let has = |t, cats: &[Category]| cats.iter().any(|&c| catalog.has(t, c));
        World {
            w: grid.width() as isize,
            h: grid.height() as isize,
            open: grid.cells().iter().map(|&t| has(t, &physics.passable)).collect(),
            solid: grid.cells().iter().map(|&t| has(t, &physics.support)).collect(),
            max_h: physics.max_jump_height,
            max_span: physics.max_jump_span,
        }
    }

    fn inside_cols(&self, c: isize) -> bool {
        (0..self.w).contains(&c)
    }

    /// Passable, with everything above the grid open and everything below closed.
    fn open(&self, c: isize, r: isize) -> bool {
        self.inside_cols(c) && r < self.h && (r < 0 || self.open[(r * self.w + c) as usize])
    }

    fn stands(&self, c: isize, r: isize) -> bool {
        self.inside_cols(c)
            && r >= 0
            && r + 1 < self.h
            && self.open(c, r)
            && self.solid[((r + 1) * self.w + c) as usize]
    }

    pub fn grounds(&self) -> Vec<(isize, isize)> {
        let mut out = Vec::new();
        for r in 0..self.h {
            for c in 0..self.w {
                if self.stands(c, r) {
                    out.push((c, r));
                }
            }
        }
        out
    }

    /// Outgoing transitions with their costs; `first` restricts the kind of
    /// move that may leave a ground state ("walk", "fall", "jump").
    pub fn next(&self, s: State, first: Option<&str>) -> Vec<(State, usize)> {
        use State::*;
        let mut out = Vec::new();
        match s {
            Ground(c, r) => {
                for d in [-1, 1] {
                    let allow = |k: &str| first.is_none_or(|f| f == k);
                    if allow("walk") && self.stands(c + d, r) {
                        out.push((Ground(c + d, r), 1));
                    }
                    if allow("fall") && self.open(c + d, r) && !self.stands(c + d, r) {
                        out.push((Drop(c + d, r), 1));
                    }
                    if allow("jump") && self.max_h >= 1 && self.open(c, r - 1) {
                        out.push((Rise { col: c, row: r - 1, dir: d, risen: 1 }, 1));
                    }
                }
            }
            Drop(c, r) => {
                if self.stands(c, r + 1) {
                    out.push((Ground(c, r + 1), 1));
                } else if self.open(c, r + 1) {
                    out.push((Drop(c, r + 1), 1));
                }
            }
            Rise { col, row, dir, risen } => {
                if risen < self.max_h && self.open(col, row - 1) {
                    out.push((Rise { col, row: row - 1, dir, risen: risen + 1 }, 1));
                }
                if self.open(col + dir, row) {
                    out.push((Glide { col: col + dir, row, dir, moved: 1 }, 1));
                }
            }
            Glide { col, row, dir, moved } => {
                if moved < self.max_span && self.open(col + dir, row) {
                    out.push((Glide { col: col + dir, row, dir, moved: moved + 1 }, 1));
                }
                if self.stands(col, row) {
                    out.push((Ground(col, row), 0));
                }
                if self.open(col, row + 1) {
                    out.push((Sink(col, row + 1), 1));
                }
            }
            Sink(c, r) => {
                if self.stands(c, r) {
                    out.push((Ground(c, r), 0));
                }
                if self.open(c, r + 1) {
                    out.push((Sink(c, r + 1), 1));
                }
            }
        }
        out
    }

    /// Every state reachable from `sources`, with Bellman-Ford distances.
    /// Ground states other than the sources are not expanded when `single_move` is set.
    pub fn distances(&self, sources: &[State], first: Option<&str>, single_move: bool) -> HashMap<State, usize> {
        let mut dist: HashMap<State, usize> = sources.iter().map(|&s| (s, 0)).collect();
        loop {
            let mut changed = false;
            let snapshot: Vec<(State, usize)> = dist.iter().map(|(&s, &d)| (s, d)).collect();
            for (s, d) in snapshot {
                let is_source = sources.contains(&s);
                if single_move && matches!(s, State::Ground(..)) && !is_source {
                    continue;
                }
                let restrict = if is_source { first } else { None };
                for (t, cost) in self.next(s, restrict) {
                    let nd = d + cost;
                    if dist.get(&t).is_none_or(|&old| nd < old) {
                        dist.insert(t, nd);
                        changed = true;
                    }
                }
            }
            if !changed {
                return dist;
            }
        }
    }

    /// `(playable, shortest length)` from the first column with footing to the last column.
    pub fn shortest(&self) -> (bool, Option<usize>) {
        let grounds = self.grounds();
        let Some(start_col) = (0..self.w).find(|&c| grounds.iter().any(|g| g.0 == c)) else {
            return (false, None);
        };
        let sources: Vec<State> =
            grounds.iter().filter(|g| g.0 == start_col).map(|&(c, r)| State::Ground(c, r)).collect();
        let dist = self.distances(&sources, None, false);
        let best = dist
            .iter()
            .filter_map(|(s, &d)| match s {
                State::Ground(c, _) if *c == self.w - 1 => Some(d),
                _ => None,
            })
            .min();
        (best.is_some(), best)
    }

    /// Cost of one move of the given kind between two ground cells, if legal.
    pub fn move_cost(&self, from: (isize, isize), to: (isize, isize), kind: &str) -> Option<usize> {
        if !self.stands(from.0, from.1) {
            return None;
        }
        let dist = self.distances(&[State::Ground(from.0, from.1)], Some(kind), true);
        dist.get(&State::Ground(to.0, to.1)).copied().filter(|_| from != to)
    }
}

// ---------------------------------------------------------------- cardinality

/// Projected models of an encoding over `n` leading variables, by DPLL.
pub fn cardinality_models(n: usize, clauses: &[Vec<Lit>], total_vars: usize) -> BTreeSet<u32> {
    projected_models(total_vars, clauses, n)
}

// ---------------------------------------------------------------- generators

/// Builds a two-row level whose bottom row realizes exactly the requested
/// density and difficulty: `d` solid tiles and `h` gaps, top row background.
pub fn level_with(d: usize, h: usize, catalog: &TileCatalog) -> TileGrid {
    let w = (d + h).max(1);
    assert!(d + h >= 1, "every bottom-row tile counts toward one metric");
    let bg = catalog.id('-').unwrap();
    let solid = catalog.id('X').unwrap();
    let mut g = TileGrid::filled(w, 2, bg);
    for c in 0..d {
        g.set(c, 1, solid);
    }
    g
}

pub type Request = (Option<(BinRange, BinRange)>, u64);

/// Always succeeds with a level at the top of the requested bins; records
/// every request.
pub struct StubGenerator {
    pub catalog: TileCatalog,
    pub calls: std::sync::Mutex<Vec<Request>>,
    /// Bins for which the stub reports UNSAT.
    pub unsat: BTreeSet<(usize, usize)>,
}

impl StubGenerator {
    pub fn new() -> Self {
        StubGenerator { catalog: TileCatalog::smb(), calls: Default::default(), unsat: BTreeSet::new() }
    }
}

impl Generator for StubGenerator {
    fn template(&self) -> TemplateKind {
        TemplateKind::NbrPlus
    }

    fn rules(&self) -> Option<&RuleSet> {
        None
    }

    fn generate(&self, target: Option<(BinRange, BinRange)>, seed: u64, _: Option<Duration>) -> Result<GenOutcome> {
        self.calls.lock().unwrap().push((target, seed));
        let (d, h) = target.expect("stub only serves targeted requests");
        if self.unsat.contains(&(d.lo, h.lo)) {
            return Ok(GenOutcome::Unsat);
        }
        Ok(GenOutcome::Level(level_with(d.hi - 1, h.hi - 1, &self.catalog)))
    }
}

/// Per-cell validity of a grid under each template's rules.
pub fn validity(grid: &TileGrid, rules: &BTreeMap<TemplateKind, RuleSet>) -> BTreeMap<TemplateKind, bool> {
    rules.iter().map(|(&k, r)| (k, tilerange::patterns::check_grid(grid, r).is_empty())).collect()
}
