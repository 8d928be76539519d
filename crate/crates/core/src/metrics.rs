//! Density and difficulty tile counts, expressive-range binning and
//! interestingness normalization.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Category, CategorySet, TileCatalog, TileGrid};
use crate::error::{Error, Result};
use crate::pathfind::PathResult;

/// Number of tiles that are not background.
pub fn density(segment: &TileGrid, catalog: &TileCatalog) -> usize {
    segment.cells().iter().filter(|&&t| !catalog.has(t, Category::Background)).count()
}

/// Enemy and hazard tiles anywhere, plus gap tiles (background in the bottom row).
pub fn difficulty(segment: &TileGrid, catalog: &TileCatalog) -> usize {
    let danger = CategorySet::of(&[Category::Enemy, Category::Hazard]);
    let bottom = segment.height() - 1;
    let mut count = 0;
    for row in 0..segment.height() {
        for col in 0..segment.width() {
            let cats = catalog.categories(segment.get(col, row));
            if cats.intersects(danger) || (row == bottom && cats.contains(Category::Background)) {
                count += 1;
            }
        }
    }
    count
}

/// One rectangle of the density x difficulty grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub density_bin: usize,
    pub difficulty_bin: usize,
}

impl CellKey {
    pub fn new(density_bin: usize, difficulty_bin: usize) -> Self {
        CellKey { density_bin, difficulty_bin }
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.density_bin, self.difficulty_bin)
    }
}

/// Half-open `[lo, hi)` range of tile counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinRange {
    pub lo: usize,
    pub hi: usize,
}

impl BinRange {
    pub fn contains(&self, v: usize) -> bool {
        self.lo <= v && v < self.hi
    }

    /// Range label, e.g. `60-75`.
    pub fn label(&self) -> String {
        format!("{}-{}", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub min: usize,
    pub max: usize,
    pub bin_width: usize,
}

impl Axis {
    pub fn bins(&self) -> usize {
        (self.max - self.min) / self.bin_width
    }

    pub fn bin(&self, v: usize) -> Option<usize> {
        if v < self.min || v >= self.max {
            return None;
        }
        Some((v - self.min) / self.bin_width)
    }

    pub fn range(&self, bin: usize) -> BinRange {
        let lo = self.min + bin * self.bin_width;
        BinRange { lo, hi: lo + self.bin_width }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.bin_width == 0 {
            return Err(Error::InvalidAxes(format!("{name} bin width must be >= 1")));
        }
        if self.max <= self.min {
            return Err(Error::InvalidAxes(format!("{name} max must exceed min")));
        }
        if !(self.max - self.min).is_multiple_of(self.bin_width) {
            return Err(Error::InvalidAxes(format!(
                "{name} range {}..{} is not a whole number of {}-wide bins",
                self.min, self.max, self.bin_width
            )));
        }
        Ok(())
    }
}

/// Binning of the density and difficulty axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AxesSpec {
    pub density: Axis,
    pub difficulty: Axis,
}

impl Default for AxesSpec {
    /// Density `[0,150)` in 15-tile bins, difficulty `[0,24)` in 3-tile bins.
    fn default() -> Self {
        AxesSpec {
            density: Axis { min: 0, max: 150, bin_width: 15 },
            difficulty: Axis { min: 0, max: 24, bin_width: 3 },
        }
    }
}

impl AxesSpec {
    pub fn new(density: Axis, difficulty: Axis) -> Result<Self> {
        let axes = AxesSpec { density, difficulty };
        axes.validate()?;
        Ok(axes)
    }

    pub fn validate(&self) -> Result<()> {
        self.density.validate("density")?;
        self.difficulty.validate("difficulty")
    }

    /// All cells, density-major.
    pub fn cells(&self) -> impl Iterator<Item = CellKey> + '_ {
        (0..self.density.bins())
            .flat_map(move |d| (0..self.difficulty.bins()).map(move |h| CellKey::new(d, h)))
    }

    pub fn ranges(&self, cell: CellKey) -> (BinRange, BinRange) {
        (self.density.range(cell.density_bin), self.difficulty.range(cell.difficulty_bin))
    }

    pub fn label(&self, cell: CellKey) -> String {
        let (d, h) = self.ranges(cell);
        format!("d{}_h{}", d.label(), h.label())
    }
}

/// Maps a (density, difficulty) pair to its cell, or `None` when out of range.
pub fn bin_cell(density: usize, difficulty: usize, axes: &AxesSpec) -> Option<CellKey> {
    Some(CellKey::new(axes.density.bin(density)?, axes.difficulty.bin(difficulty)?))
}

/// Path length plus jump count; unplayable segments score 0.
pub fn interestingness_raw(path: &PathResult) -> usize {
    if path.playable {
        path.length + path.jumps
    } else {
        0
    }
}

/// Min-max normalization to `[0, 1]`; a constant list maps to all zeros.
pub fn normalize(values: &[f64]) -> Result<Vec<f64>> {
    let (min, max) = values
        .iter()
        .fold(None, |acc: Option<(f64, f64)>, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
        .ok_or(Error::EmptyValues)?;
    let span = max - min;
    Ok(values.iter().map(|&v| if span > 0.0 { (v - min) / span } else { 0.0 }).collect())
}
