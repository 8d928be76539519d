use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("catalog: duplicate character {0:?}")]
    DuplicateCharacter(char),
    #[error("catalog: entry {0:?} has an empty category list")]
    EmptyCategories(char),
    #[error("catalog: unknown category {0:?}")]
    UnknownCategory(String),
    #[error("catalog: entry key {0:?} must be exactly one character")]
    BadCatalogKey(String),
    #[error("catalog: no character has category background")]
    NoBackground,
    #[error("catalog: {0}")]
    CatalogSyntax(String),

    #[error("level is empty")]
    EmptyLevel,
    #[error("ragged level: row {row} has {found} columns, expected {expected}")]
    RaggedRows { row: usize, expected: usize, found: usize },
    #[error("unknown tile {ch:?} at row {row}, column {col}")]
    UnknownTile { ch: char, row: usize, col: usize },
    #[error("window {window_w}x{window_h} does not fit level {level_w}x{level_h}")]
    WindowMismatch { window_w: usize, window_h: usize, level_w: usize, level_h: usize },
    #[error("stride must be at least 1")]
    ZeroStride,
    #[error("no levels")]
    NoLevels,
    #[error("level {name}: {source}")]
    InLevel { name: String, source: Box<Error> },

    #[error("invalid axes: {0}")]
    InvalidAxes(String),
    #[error("normalize: empty input")]
    EmptyValues,

    #[error("empty corpus")]
    EmptyCorpus,
    #[error("rule set is for template {found}, expected {expected}")]
    TemplateMismatch { expected: String, found: String },
    #[error("rule set: {0}")]
    RuleSetFormat(String),

    #[error("exactly-one over an empty variable list")]
    EmptyExactlyOne,
    #[error("cardinality bounds invalid: lo={lo} hi={hi} n={n}")]
    CardinalityBounds { lo: usize, hi: usize, n: usize },
    #[error("decode: cell {cell} has {count} true tile variables")]
    DecodeCell { cell: usize, count: usize },
    #[error("model has {found} values, instance has {expected} variables")]
    ModelLength { expected: usize, found: usize },
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
    #[error("dimacs: {0}")]
    Dimacs(String),
    #[error("external solver: {0}")]
    ExternalSolver(String),

    #[error("tile frequency: levels have mismatched dimensions")]
    DimensionMismatch,
    #[error("tile frequency: empty level set")]
    EmptyLevelSet,

    #[error(
        "generated level for cell {cell} measured density {density}, difficulty {difficulty} \
         outside the requested bin (encoder bug)"
    )]
    BinMismatch { cell: String, density: usize, difficulty: usize },
    #[error("generated level for cell {cell} violates {violations} pattern constraints (encoder bug)")]
    PatternMismatch { cell: String, violations: usize },

    #[error("config: {0}")]
    Config(String),
    #[error("missing input: {}", .0.display())]
    MissingPath(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
