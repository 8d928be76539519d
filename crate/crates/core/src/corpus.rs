//! Tile catalogs, level grids and the sliding-window segment corpus.
//!
//! Levels are plain text, one character per tile, rows top to bottom. A
//! [`TileCatalog`] maps each character to a dense id and a set of semantic
//! categories; everything downstream works on ids.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type TileId = u16;

/// Semantic tile categories used by metrics, encoding and movement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Background,
    Solid,
    Enemy,
    Hazard,
    Passable,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Background,
        Category::Solid,
        Category::Enemy,
        Category::Hazard,
        Category::Passable,
    ];

    fn bit(self) -> u8 {
        1 << self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Background => "background",
            Category::Solid => "solid",
            Category::Enemy => "enemy",
            Category::Hazard => "hazard",
            Category::Passable => "passable",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::UnknownCategory(name.to_string()))
    }
}

/// Small bit set of [`Category`] values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CategorySet(u8);

impl CategorySet {
    pub fn of(cats: &[Category]) -> Self {
        CategorySet(cats.iter().fold(0, |acc, c| acc | c.bit()))
    }

    pub fn contains(self, cat: Category) -> bool {
        self.0 & cat.bit() != 0
    }

    pub fn intersects(self, other: CategorySet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Category> {
        Category::ALL.into_iter().filter(move |c| self.contains(*c))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileEntry {
    pub ch: char,
    pub categories: CategorySet,
}

#[derive(Deserialize)]
struct CatalogFile {
    #[serde(default)]
    tile: Vec<CatalogFileEntry>,
}

#[derive(Deserialize)]
struct CatalogFileEntry {
    char: String,
    categories: Vec<String>,
}

/// Maps tile characters to contiguous ids and semantic categories.
///
/// Ids are assigned in declaration order starting at 0. `boundary_id` is one
/// past the last id and only ever stands for out-of-grid padding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileCatalog {
    entries: Vec<TileEntry>,
    by_char: HashMap<char, TileId>,
}

impl TileCatalog {
    /// Builds a catalog from `(character, categories)` pairs in id order.
    pub fn new(entries: impl IntoIterator<Item = (char, Vec<Category>)>) -> Result<Self> {
        let mut out = TileCatalog { entries: Vec::new(), by_char: HashMap::new() };
        for (ch, cats) in entries {
            if cats.is_empty() {
                return Err(Error::EmptyCategories(ch));
            }
            if out.by_char.contains_key(&ch) {
                return Err(Error::DuplicateCharacter(ch));
            }
            out.by_char.insert(ch, out.entries.len() as TileId);
            out.entries.push(TileEntry { ch, categories: CategorySet::of(&cats) });
        }
        if !out.entries.iter().any(|e| e.categories.contains(Category::Background)) {
            return Err(Error::NoBackground);
        }
        Ok(out)
    }

    /// Parses the TOML catalog format:
    ///
    /// ```toml
    /// [[tile]]
    /// char = "-"
    /// categories = ["background", "passable"]
    /// ```
    pub fn from_config(text: &str) -> Result<Self> {
        let file: CatalogFile =
            toml::from_str(text).map_err(|e| Error::CatalogSyntax(e.to_string()))?;
        let mut entries = Vec::with_capacity(file.tile.len());
        for e in file.tile {
            let mut chars = e.char.chars();
            let ch = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => return Err(Error::BadCatalogKey(e.char)),
            };
            let cats = e.categories.iter().map(|n| Category::parse(n)).collect::<Result<Vec<_>>>()?;
            entries.push((ch, cats));
        }
        TileCatalog::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TileCatalog::from_config(&text)
    }

    /// Serializes back to the TOML catalog format.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let cats: Vec<String> = e.categories.iter().map(|c| format!("\"{}\"", c.name())).collect();
            let ch = toml::Value::String(e.ch.to_string()).to_string();
            out.push_str(&format!("[[tile]]\nchar = {ch}\ncategories = [{}]\n\n", cats.join(", ")));
        }
        out
    }

    /// The default Super Mario Bros. catalog (VGLC characters).
    pub fn smb() -> Self {
        use Category::*;
        TileCatalog::new([
            ('-', vec![Background, Passable]),
            ('X', vec![Solid]),
            ('S', vec![Solid]),
            ('?', vec![Solid]),
            ('Q', vec![Solid]),
            ('E', vec![Enemy, Passable]),
            ('<', vec![Solid]),
            ('>', vec![Solid]),
            ('[', vec![Solid]),
            (']', vec![Solid]),
            ('o', vec![Passable]),
        ])
        .expect("default catalog is valid")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn boundary_id(&self) -> TileId {
        self.entries.len() as TileId
    }

    pub fn id(&self, ch: char) -> Option<TileId> {
        self.by_char.get(&ch).copied()
    }

    pub fn ch(&self, id: TileId) -> Option<char> {
        self.entries.get(id as usize).map(|e| e.ch)
    }

    pub fn categories(&self, id: TileId) -> CategorySet {
        self.entries.get(id as usize).map(|e| e.categories).unwrap_or_default()
    }

    pub fn has(&self, id: TileId, cat: Category) -> bool {
        self.categories(id).contains(cat)
    }

    pub fn entries(&self) -> &[TileEntry] {
        &self.entries
    }

    pub fn ids(&self) -> impl Iterator<Item = TileId> {
        0..self.entries.len() as TileId
    }

    /// Ids of all tiles carrying any category in `cats`.
    pub fn ids_with(&self, cats: CategorySet) -> Vec<TileId> {
        self.ids().filter(|&t| self.categories(t).intersects(cats)).collect()
    }
}

/// A `width x height` grid of tile ids stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TileGrid {
    width: usize,
    height: usize,
    cells: Vec<TileId>,
}

impl TileGrid {
    pub fn new(width: usize, height: usize, cells: Vec<TileId>) -> Self {
        assert!(width >= 1 && height >= 1, "grid must be at least 1x1");
        assert_eq!(cells.len(), width * height, "cell count must equal width*height");
        TileGrid { width, height, cells }
    }

    pub fn filled(width: usize, height: usize, tile: TileId) -> Self {
        TileGrid::new(width, height, vec![tile; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[TileId] {
        &self.cells
    }

    pub fn get(&self, col: usize, row: usize) -> TileId {
        self.cells[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, tile: TileId) {
        self.cells[row * self.width + col] = tile;
    }

    /// Reads `(col, row)` with out-of-grid positions mapped to `boundary`.
    pub fn get_or(&self, col: isize, row: isize, boundary: TileId) -> TileId {
        if col < 0 || row < 0 || col as usize >= self.width || row as usize >= self.height {
            boundary
        } else {
            self.get(col as usize, row as usize)
        }
    }

    /// Copies columns `start..start + width`.
    pub fn columns(&self, start: usize, width: usize) -> TileGrid {
        let mut cells = Vec::with_capacity(width * self.height);
        for row in 0..self.height {
            let base = row * self.width + start;
            cells.extend_from_slice(&self.cells[base..base + width]);
        }
        TileGrid::new(width, self.height, cells)
    }

    pub fn mirrored(&self) -> TileGrid {
        let mut cells = Vec::with_capacity(self.cells.len());
        for row in self.cells.chunks(self.width) {
            cells.extend(row.iter().rev());
        }
        TileGrid::new(self.width, self.height, cells)
    }

    /// Renders using catalog characters, one `\n`-terminated line per row.
    pub fn render(&self, catalog: &TileCatalog) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for row in self.cells.chunks(self.width) {
            out.extend(row.iter().map(|&t| catalog.ch(t).unwrap_or('#')));
            out.push('\n');
        }
        out
    }

    pub fn display<'a>(&'a self, catalog: &'a TileCatalog) -> impl fmt::Display + 'a {
        struct D<'a>(&'a TileGrid, &'a TileCatalog);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0.render(self.1))
            }
        }
        D(self, catalog)
    }
}

/// Parses level text into a grid.
pub fn parse_level(text: &str, catalog: &TileCatalog) -> Result<TileGrid> {
    let rows: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let rows: Vec<&str> = match rows.iter().rposition(|r| !r.is_empty()) {
        Some(last) => rows[..=last].to_vec(),
        None => return Err(Error::EmptyLevel),
    };
    let width = rows[0].chars().count();
    if width == 0 {
        return Err(Error::EmptyLevel);
    }
    let mut cells = Vec::with_capacity(width * rows.len());
    for (r, line) in rows.iter().enumerate() {
        let found = line.chars().count();
        if found != width {
            return Err(Error::RaggedRows { row: r, expected: width, found });
        }
        for (c, ch) in line.chars().enumerate() {
            let id = catalog.id(ch).ok_or(Error::UnknownTile { ch, row: r, col: c })?;
            cells.push(id);
        }
    }
    Ok(TileGrid::new(width, rows.len(), cells))
}

/// Cuts a level into horizontal windows of `window_w x window_h`, left to right.
pub fn slide_windows(
    level: &TileGrid,
    window_w: usize,
    window_h: usize,
    stride: usize,
) -> Result<Vec<TileGrid>> {
    Ok(window_starts(level, window_w, window_h, stride)?
        .map(|start| level.columns(start, window_w))
        .collect())
}

fn window_starts(
    level: &TileGrid,
    window_w: usize,
    window_h: usize,
    stride: usize,
) -> Result<impl Iterator<Item = usize>> {
    if stride == 0 {
        return Err(Error::ZeroStride);
    }
    if window_w == 0 || window_w > level.width() || window_h != level.height() {
        return Err(Error::WindowMismatch {
            window_w,
            window_h,
            level_w: level.width(),
            level_h: level.height(),
        });
    }
    Ok((0..=level.width() - window_w).step_by(stride))
}

/// Where a segment came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub level: String,
    pub start_col: usize,
}

/// Fixed-size segments cut from a set of example levels.
#[derive(Clone, Debug)]
pub struct Corpus {
    pub catalog: TileCatalog,
    pub segments: Vec<TileGrid>,
    pub provenance: Vec<Provenance>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Corpus-level view over generated or loaded segments without provenance.
    pub fn from_segments(catalog: TileCatalog, segments: Vec<TileGrid>) -> Self {
        let provenance = (0..segments.len())
            .map(|i| Provenance { level: format!("segment-{i}"), start_col: 0 })
            .collect();
        Corpus { catalog, segments, provenance }
    }
}

/// Builds a corpus from named level texts.
pub fn build_corpus(
    levels: &[(String, String)],
    catalog: &TileCatalog,
    window_w: usize,
    window_h: usize,
    stride: usize,
) -> Result<Corpus> {
    if levels.is_empty() {
        return Err(Error::NoLevels);
    }
    let mut segments = Vec::new();
    let mut provenance = Vec::new();
    for (name, text) in levels {
        let wrap = |e: Error| Error::InLevel { name: name.clone(), source: Box::new(e) };
        let level = parse_level(text, catalog).map_err(wrap)?;
        for start in window_starts(&level, window_w, window_h, stride).map_err(wrap)? {
            segments.push(level.columns(start, window_w));
            provenance.push(Provenance { level: name.clone(), start_col: start });
        }
    }
    Ok(Corpus { catalog: catalog.clone(), segments, provenance })
}

/// Reads every `*.txt` file in `dir`, sorted by file name.
pub fn read_level_dir(dir: &Path) -> Result<Vec<(String, String)>> {
    if !dir.is_dir() {
        return Err(Error::MissingPath(dir.to_path_buf()));
    }
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            Ok((name, text))
        })
        .collect()
}
