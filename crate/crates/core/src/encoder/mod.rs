//! Compiles generation tasks into CNF and decodes models back into grids.
//!
//! Literals use the DIMACS convention: variables are numbered from 1 and a
//! negative literal is the negation of its variable.

pub mod cardinality;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use cardinality::encode_cardinality;

use crate::corpus::{Category, CategorySet, TileCatalog, TileGrid, TileId};
use crate::error::{Error, Result};
use crate::metrics::BinRange;
use crate::patterns::{input_positions, RuleSet};

pub type Lit = i32;

/// Truth value per variable; index `v - 1` holds variable `v`.
pub type Model = Vec<bool>;

pub fn lit_value(model: &[bool], lit: Lit) -> bool {
    let v = model[lit.unsigned_abs() as usize - 1];
    if lit > 0 {
        v
    } else {
        !v
    }
}

/// Where the primary `(cell, tile)` variables live.
///
/// Primary variable of `(cell, tile)` is `1 + cell * tiles + tile`; all
/// variables above `primary_count()` are auxiliaries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarMap {
    pub width: usize,
    pub height: usize,
    pub tiles: usize,
    pub selector_vars: usize,
    pub counter_vars: usize,
}

impl VarMap {
    pub fn cells(&self) -> usize {
        self.width * self.height
    }

    pub fn primary_count(&self) -> usize {
        self.cells() * self.tiles
    }

    pub fn primary(&self, cell: usize, tile: TileId) -> Lit {
        (1 + cell * self.tiles + tile as usize) as Lit
    }

    pub fn cell_at(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }
}

/// A CNF formula plus the bookkeeping needed to decode its models.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfInstance {
    pub var_count: usize,
    pub clauses: Vec<Vec<Lit>>,
    pub var_map: Option<VarMap>,
    /// Set when the task was infeasible before any search (e.g. a count bound
    /// larger than the grid); the clauses then contain `(v) (-v)`.
    pub trivially_unsat: bool,
}

impl CnfInstance {
    pub fn new(var_count: usize, clauses: Vec<Vec<Lit>>) -> Self {
        CnfInstance { var_count, clauses, var_map: None, trivially_unsat: false }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::MalformedInstance(format!("clause {i} is empty")));
            }
            if let Some(&l) = c.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > self.var_count) {
                return Err(Error::MalformedInstance(format!("clause {i} has literal {l} out of range")));
            }
        }
        Ok(())
    }
}

/// Accumulates clauses and hands out fresh variables.
#[derive(Debug, Default)]
pub struct CnfBuilder {
    var_count: usize,
    clauses: Vec<Vec<Lit>>,
}

impl CnfBuilder {
    pub fn with_vars(var_count: usize) -> Self {
        CnfBuilder { var_count, clauses: Vec::new() }
    }

    pub fn new_var(&mut self) -> Lit {
        self.var_count += 1;
        self.var_count as Lit
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn add_clause(&mut self, clause: Vec<Lit>) {
        debug_assert!(!clause.is_empty());
        self.clauses.push(clause);
    }

    pub fn extend(&mut self, clauses: impl IntoIterator<Item = Vec<Lit>>) {
        self.clauses.extend(clauses);
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn finish(self) -> CnfInstance {
        CnfInstance::new(self.var_count, self.clauses)
    }

    /// A literal that every model sets to `value`.
    pub fn constant(&mut self, value: bool) -> Lit {
        let v = self.new_var();
        self.add_clause(vec![if value { v } else { -v }]);
        v
    }

    /// A literal equivalent to the disjunction of `lits`.
    pub fn or_literal(&mut self, lits: &[Lit]) -> Lit {
        match lits {
            [] => self.constant(false),
            [one] => *one,
            _ => {
                let y = self.new_var();
                let mut def = vec![-y];
                def.extend_from_slice(lits);
                self.add_clause(def);
                for &l in lits {
                    self.add_clause(vec![-l, y]);
                }
                y
            }
        }
    }
}

/// One at-least-one clause plus pairwise at-most-one clauses.
pub fn encode_exactly_one(vars: &[Lit]) -> Result<Vec<Vec<Lit>>> {
    if vars.is_empty() {
        return Err(Error::EmptyExactlyOne);
    }
    let mut out = Vec::with_capacity(1 + vars.len() * (vars.len() - 1) / 2);
    out.push(vars.to_vec());
    for (i, &a) in vars.iter().enumerate() {
        for &b in &vars[i + 1..] {
            out.push(vec![-a, -b]);
        }
    }
    Ok(out)
}

/// Adds the pattern constraints of `ruleset` for a `width x height` grid.
///
/// For every input location, group and input tile, the input tile implies one
/// of its allowed output tuples. Tuples that disagree with the sentinel at
/// out-of-grid offsets are dropped. Joint groups get one selector variable per
/// distinct in-grid tuple per location, implying each of its member literals.
///
/// Returns the number of selector variables added. A frame location whose
/// sentinel context admits no tuple makes the task unsatisfiable; that is
/// encoded as the pair `(v) (-v)` and reported through `frame_conflict`.
pub fn encode_patterns(
    builder: &mut CnfBuilder,
    var_map: &VarMap,
    ruleset: &RuleSet,
) -> Result<PatternEncoding> {
    ruleset.validate()?;
    let b = ruleset.boundary_id;
    if var_map.tiles != b as usize {
        return Err(Error::RuleSetFormat(format!(
            "rule set has {} tiles, grid encoding has {}",
            b, var_map.tiles
        )));
    }
    let (w, h) = (var_map.width as isize, var_map.height as isize);
    let in_grid = |c: isize, r: isize| c >= 0 && r >= 0 && c < w && r < h;
    let start_vars = builder.var_count();
    let mut infeasible = false;

    for (col, row) in input_positions(var_map.width, var_map.height) {
        let inside = in_grid(col, row);
        let inputs: Vec<TileId> = if inside { (0..b).collect() } else { vec![b] };
        for (g, offsets) in ruleset.shape.output_groups.iter().enumerate() {
            let targets: Vec<Option<usize>> = offsets
                .iter()
                .map(|&(dx, dy)| {
                    let (c, r) = (col + dx, row + dy);
                    in_grid(c, r).then(|| var_map.cell_at(c as usize, r as usize))
                })
                .collect();
            let mut selectors: HashMap<Vec<Lit>, Lit> = HashMap::new();
            for &input in &inputs {
                let input_lit = inside.then(|| var_map.primary(var_map.cell_at(col as usize, row as usize), input));
                let mut alternatives: Vec<Lit> = Vec::new();
                let mut always = false;
                for tuple in ruleset.allowed(g, input).into_iter().flatten() {
                    let mut members = Vec::with_capacity(tuple.len());
                    let consistent = tuple.iter().zip(&targets).all(|(&t, target)| match target {
                        None => t == b,
                        Some(cell) => {
                            members.push(var_map.primary(*cell, t));
                            t != b
                        }
                    });
                    if !consistent {
                        continue;
                    }
                    match members.len() {
                        0 => {
                            always = true;
                            break;
                        }
                        1 => alternatives.push(members[0]),
                        _ => {
                            let sel = *selectors.entry(members).or_insert_with_key(|members| {
                                let s = builder.new_var();
                                for &m in members {
                                    builder.add_clause(vec![-s, m]);
                                }
                                s
                            });
                            alternatives.push(sel);
                        }
                    }
                }
                if always {
                    continue;
                }
                let mut clause = Vec::with_capacity(alternatives.len() + 1);
                if let Some(x) = input_lit {
                    clause.push(-x);
                }
                alternatives.sort_unstable();
                alternatives.dedup();
                clause.extend(alternatives);
                if clause.is_empty() {
                    infeasible = true;
                } else {
                    builder.add_clause(clause);
                }
            }
        }
    }
    let selector_vars = builder.var_count() - start_vars;
    if infeasible {
        let v = builder.new_var();
        builder.add_clause(vec![v]);
        builder.add_clause(vec![-v]);
    }
    Ok(PatternEncoding { selector_vars, frame_conflict: infeasible })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatternEncoding {
    pub selector_vars: usize,
    pub frame_conflict: bool,
}

/// Inclusive `[lo, hi]` bounds on a tile count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountBounds {
    pub lo: usize,
    pub hi: usize,
}

impl CountBounds {
    /// Count bounds for a half-open bin range: `60-75` becomes `60..=74`.
    pub fn from_bin(range: BinRange) -> Self {
        CountBounds { lo: range.lo, hi: range.hi.saturating_sub(1) }
    }
}

/// Per-cell indicator literal for "the tile at `cell` is in `set`".
fn cell_indicator(builder: &mut CnfBuilder, var_map: &VarMap, cell: usize, set: &[TileId]) -> Lit {
    let tiles = var_map.tiles as TileId;
    let complement: Vec<TileId> = (0..tiles).filter(|t| !set.contains(t)).collect();
    if complement.len() == 1 && set.len() > 1 {
        return -var_map.primary(cell, complement[0]);
    }
    if complement.is_empty() {
        return builder.constant(true);
    }
    let lits: Vec<Lit> = set.iter().map(|&t| var_map.primary(cell, t)).collect();
    builder.or_literal(&lits)
}

/// Indicators counted by the density metric, one per cell.
pub fn density_indicators(builder: &mut CnfBuilder, var_map: &VarMap, catalog: &TileCatalog) -> Vec<Lit> {
    let non_bg: Vec<TileId> = catalog.ids().filter(|&t| !catalog.has(t, Category::Background)).collect();
    (0..var_map.cells()).map(|cell| cell_indicator(builder, var_map, cell, &non_bg)).collect()
}

/// Indicators counted by the difficulty metric, one per cell: enemy or hazard
/// tiles anywhere, plus background tiles in the bottom row.
pub fn difficulty_indicators(builder: &mut CnfBuilder, var_map: &VarMap, catalog: &TileCatalog) -> Vec<Lit> {
    let danger = catalog.ids_with(CategorySet::of(&[Category::Enemy, Category::Hazard]));
    let bottom = catalog.ids_with(CategorySet::of(&[Category::Enemy, Category::Hazard, Category::Background]));
    (0..var_map.cells())
        .map(|cell| {
            let set = if cell / var_map.width == var_map.height - 1 { &bottom } else { &danger };
            cell_indicator(builder, var_map, cell, set)
        })
        .collect()
}

/// Builds the full generation task: one tile per cell, pattern rules, and
/// optional density/difficulty count bounds. Without bounds this is the
/// unconstrained (random-baseline) task.
pub fn encode_task(
    width: usize,
    height: usize,
    ruleset: &RuleSet,
    catalog: &TileCatalog,
    density_bounds: Option<CountBounds>,
    difficulty_bounds: Option<CountBounds>,
) -> Result<CnfInstance> {
    let tiles = catalog.len();
    let mut var_map = VarMap { width, height, tiles, selector_vars: 0, counter_vars: 0 };
    let mut builder = CnfBuilder::with_vars(var_map.primary_count());
    let area = width * height;
    let infeasible_bound = [density_bounds, difficulty_bounds]
        .into_iter()
        .flatten()
        .any(|b| b.lo > b.hi || b.lo > area);
    if infeasible_bound {
        let v = builder.new_var();
        builder.add_clause(vec![v]);
        builder.add_clause(vec![-v]);
        let mut cnf = builder.finish();
        cnf.var_map = Some(var_map);
        cnf.trivially_unsat = true;
        return Ok(cnf);
    }

    for cell in 0..area {
        let lits: Vec<Lit> = (0..tiles as TileId).map(|t| var_map.primary(cell, t)).collect();
        builder.extend(encode_exactly_one(&lits)?);
    }
    let patterns = encode_patterns(&mut builder, &var_map, ruleset)?;
    var_map.selector_vars = patterns.selector_vars;

    let counters_start = builder.var_count();
    if let Some(bounds) = density_bounds {
        let ind = density_indicators(&mut builder, &var_map, catalog);
        encode_cardinality(&mut builder, &ind, bounds.lo, bounds.hi.min(ind.len()))?;
    }
    if let Some(bounds) = difficulty_bounds {
        let ind = difficulty_indicators(&mut builder, &var_map, catalog);
        encode_cardinality(&mut builder, &ind, bounds.lo, bounds.hi.min(ind.len()))?;
    }
    var_map.counter_vars = builder.var_count() - counters_start;

    let mut cnf = builder.finish();
    cnf.var_map = Some(var_map);
    cnf.trivially_unsat = patterns.frame_conflict;
    Ok(cnf)
}

/// Reads the grid out of a model: each cell takes its single true tile.
pub fn decode(model: &[bool], var_map: &VarMap) -> Result<TileGrid> {
    let mut cells = Vec::with_capacity(var_map.cells());
    for cell in 0..var_map.cells() {
        let mut chosen = None;
        let mut count = 0;
        for t in 0..var_map.tiles as TileId {
            let v = var_map.primary(cell, t) as usize;
            if model.get(v - 1).copied().unwrap_or(false) {
                chosen = Some(t);
                count += 1;
            }
        }
        match (chosen, count) {
            (Some(t), 1) => cells.push(t),
            _ => return Err(Error::DecodeCell { cell, count }),
        }
    }
    Ok(TileGrid::new(var_map.width, var_map.height, cells))
}

/// The model that sets exactly the primary variables of `grid`; auxiliaries false.
pub fn grid_assignment(grid: &TileGrid, var_map: &VarMap) -> Vec<bool> {
    let mut model = vec![false; var_map.primary_count()];
    for (cell, &t) in grid.cells().iter().enumerate() {
        model[var_map.primary(cell, t) as usize - 1] = true;
    }
    model
}
