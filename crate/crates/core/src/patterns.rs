//! Pattern templates, rule extraction and the independent grid checker.
//!
//! A template pairs an input location (always the origin) with one or more
//! groups of output offsets. For each input tile a rule set stores the output
//! tuples seen in the examples. Offsets that fall outside a grid read the
//! catalog's boundary sentinel, both when extracting and when checking.
//!
//! Input locations range over the grid plus a one-tile frame around it, so
//! the sentinel also appears as an input key. This constrains how level edges
//! may look and keeps the template hierarchy exact: a grid that satisfies a
//! ring rule set also satisfies block2 and nbr-plus rule sets learned from the
//! same corpus, and block2 implies nbr-plus.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Category, Corpus, TileCatalog, TileGrid, TileId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TemplateKind {
    #[serde(rename = "ring")]
    Ring,
    #[serde(rename = "block2")]
    Block2,
    #[serde(rename = "nbr-plus", alias = "nbr_plus")]
    NbrPlus,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 3] = [TemplateKind::Ring, TemplateKind::Block2, TemplateKind::NbrPlus];

    pub fn name(self) -> &'static str {
        match self {
            TemplateKind::Ring => "ring",
            TemplateKind::Block2 => "block2",
            TemplateKind::NbrPlus => "nbr-plus",
        }
    }
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TemplateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ring" => Ok(TemplateKind::Ring),
            "block2" => Ok(TemplateKind::Block2),
            "nbr-plus" | "nbr_plus" | "nbrplus" => Ok(TemplateKind::NbrPlus),
            other => Err(Error::Config(format!("unknown template {other:?}"))),
        }
    }
}

/// `(dx, dy)` relative to the input tile; `dy` grows downward.
pub type Offset = (isize, isize);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateShape {
    pub output_groups: Vec<Vec<Offset>>,
}

impl TemplateShape {
    /// Whether the outputs of a group are constrained jointly.
    pub fn is_joint(&self) -> bool {
        self.output_groups.iter().any(|g| g.len() > 1)
    }
}

pub fn template_shape(kind: TemplateKind) -> TemplateShape {
    let output_groups = match kind {
        TemplateKind::Ring => vec![vec![
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ]],
        TemplateKind::Block2 => vec![vec![(1, 0), (0, 1), (1, 1)]],
        TemplateKind::NbrPlus => vec![vec![(0, -1)], vec![(0, 1)], vec![(-1, 0)], vec![(1, 0)]],
    };
    TemplateShape { output_groups }
}

/// Allowed output tuples per input tile, for one output group.
pub type GroupRules = BTreeMap<TileId, BTreeSet<Vec<TileId>>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    pub kind: TemplateKind,
    pub shape: TemplateShape,
    pub boundary_id: TileId,
    /// Parallel to `shape.output_groups`.
    pub rules: Vec<GroupRules>,
}

impl RuleSet {
    pub fn empty(kind: TemplateKind, boundary_id: TileId) -> Self {
        let shape = template_shape(kind);
        let rules = vec![GroupRules::new(); shape.output_groups.len()];
        RuleSet { kind, shape, boundary_id, rules }
    }

    pub fn allowed(&self, group: usize, input: TileId) -> Option<&BTreeSet<Vec<TileId>>> {
        self.rules[group].get(&input)
    }

    /// Total number of `(input, tuple)` rules over all groups.
    pub fn rule_count(&self) -> usize {
        self.rules.iter().flat_map(|g| g.values()).map(|s| s.len()).sum()
    }

    fn observe(&mut self, grid: &TileGrid) {
        let b = self.boundary_id;
        for (col, row) in input_positions(grid.width(), grid.height()) {
            let input = grid.get_or(col, row, b);
            for (g, offsets) in self.shape.output_groups.iter().enumerate() {
                let tuple = read_tuple(grid, col, row, offsets, b);
                self.rules[g].entry(input).or_default().insert(tuple);
            }
        }
    }

    /// Checks that the rule set matches its declared template.
    pub fn validate(&self) -> Result<()> {
        if self.shape != template_shape(self.kind) {
            return Err(Error::TemplateMismatch {
                expected: self.kind.to_string(),
                found: "custom shape".into(),
            });
        }
        if self.rules.len() != self.shape.output_groups.len() {
            return Err(Error::RuleSetFormat("group count does not match shape".into()));
        }
        for (g, offsets) in self.shape.output_groups.iter().enumerate() {
            for (&input, tuples) in &self.rules[g] {
                if input > self.boundary_id {
                    return Err(Error::RuleSetFormat(format!("input tile {input} out of range")));
                }
                for t in tuples {
                    if t.len() != offsets.len() || t.iter().any(|&x| x > self.boundary_id) {
                        return Err(Error::RuleSetFormat(format!("bad tuple {t:?} for input {input}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Input locations: every cell plus the one-tile frame around the grid.
pub fn input_positions(width: usize, height: usize) -> impl Iterator<Item = (isize, isize)> {
    let (w, h) = (width as isize, height as isize);
    (-1..=h).flat_map(move |row| (-1..=w).map(move |col| (col, row)))
}

fn read_tuple(grid: &TileGrid, col: isize, row: isize, offsets: &[Offset], boundary: TileId) -> Vec<TileId> {
    offsets.iter().map(|&(dx, dy)| grid.get_or(col + dx, row + dy, boundary)).collect()
}

/// Learns the rule set of `kind` from every position of every segment.
pub fn extract_rules(corpus: &Corpus, kind: TemplateKind) -> Result<RuleSet> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut rules = RuleSet::empty(kind, corpus.catalog.boundary_id());
    for seg in &corpus.segments {
        rules.observe(seg);
    }
    Ok(rules)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub col: isize,
    pub row: isize,
    pub group: usize,
    pub input: TileId,
    pub observed: Vec<TileId>,
}

/// Lists every position/group whose observed output tuple is not allowed.
pub fn check_grid(grid: &TileGrid, ruleset: &RuleSet) -> Vec<Violation> {
    let b = ruleset.boundary_id;
    let mut out = Vec::new();
    for (col, row) in input_positions(grid.width(), grid.height()) {
        let input = grid.get_or(col, row, b);
        for (group, offsets) in ruleset.shape.output_groups.iter().enumerate() {
            let observed = read_tuple(grid, col, row, offsets, b);
            let ok = ruleset.allowed(group, input).is_some_and(|s| s.contains(&observed));
            if !ok {
                out.push(Violation { col, row, group, input, observed });
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct RuleFile {
    kind: TemplateKind,
    tiles: Vec<RuleFileTile>,
    boundary_id: TileId,
    groups: Vec<RuleFileGroup>,
}

#[derive(Serialize, Deserialize)]
struct RuleFileTile {
    char: char,
    categories: Vec<Category>,
}

#[derive(Serialize, Deserialize)]
struct RuleFileGroup {
    offsets: Vec<Offset>,
    rules: BTreeMap<TileId, BTreeSet<Vec<TileId>>>,
}

/// Writes a rule set together with the catalog it was extracted under.
///
/// The file is pretty-printed JSON with sorted keys and tuples, so two
/// extractions from the same corpus diff cleanly.
pub fn write_rules(ruleset: &RuleSet, catalog: &TileCatalog) -> Result<String> {
    let file = RuleFile {
        kind: ruleset.kind,
        tiles: catalog
            .entries()
            .iter()
            .map(|e| RuleFileTile { char: e.ch, categories: e.categories.iter().collect() })
            .collect(),
        boundary_id: ruleset.boundary_id,
        groups: ruleset
            .shape
            .output_groups
            .iter()
            .zip(&ruleset.rules)
            .map(|(offsets, rules)| RuleFileGroup { offsets: offsets.clone(), rules: rules.clone() })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    Ok(text)
}

pub fn read_rules(text: &str) -> Result<(RuleSet, TileCatalog)> {
    let file: RuleFile = serde_json::from_str(text)?;
    let catalog = TileCatalog::new(file.tiles.into_iter().map(|t| (t.char, t.categories)))?;
    if file.boundary_id != catalog.boundary_id() {
        return Err(Error::RuleSetFormat("boundary id does not match catalog".into()));
    }
    let shape = TemplateShape { output_groups: file.groups.iter().map(|g| g.offsets.clone()).collect() };
    let ruleset = RuleSet {
        kind: file.kind,
        shape,
        boundary_id: file.boundary_id,
        rules: file.groups.into_iter().map(|g| g.rules).collect(),
    };
    ruleset.validate()?;
    Ok((ruleset, catalog))
}

pub fn load_rules(path: &Path) -> Result<(RuleSet, TileCatalog)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_rules(&text)
}
