//! Aggregation of attempt logs and level sets into CSV tables.
//!
//! Headers are fixed:
//!
//! - `attempts.csv`: `template,total,successful,failed,timed_out,avg_solve_time_s,avg_fail_time_s,avg_time_s`
//! - `histogram.csv`: `density_bin,difficulty_bin,count,origin`
//! - `interestingness.csv`: `density,difficulty,norm_interest,origin`
//! - `tilefreq.csv`: `row,col,tile_char,fraction`
//!
//! Means over an empty set are written as empty fields. Out-of-range levels
//! appear in the histogram as one row with both bin fields set to
//! `out_of_range`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{TileCatalog, TileGrid, TileId};
use crate::error::{Error, Result};
use crate::explorer::{AttemptRecord, Outcome};
use crate::metrics::{bin_cell, density, difficulty, interestingness_raw, normalize, AxesSpec, CellKey};
use crate::pathfind::{find_path, PhysicsSpec};
use crate::patterns::TemplateKind;

pub const ATTEMPTS_HEADER: &str =
    "template,total,successful,failed,timed_out,avg_solve_time_s,avg_fail_time_s,avg_time_s";
pub const HISTOGRAM_HEADER: &str = "density_bin,difficulty_bin,count,origin";
pub const INTERESTINGNESS_HEADER: &str = "density,difficulty,norm_interest,origin";
pub const TILEFREQ_HEADER: &str = "row,col,tile_char,fraction";

/// Writes a header and rows as CSV text.
fn csv_text(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>, rec: &[String]| w.write_record(rec).expect("writing to memory");
    write(&mut w, &header.split(',').map(str::to_owned).collect::<Vec<_>>());
    for row in rows {
        write(&mut w, &row);
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is utf-8")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AttemptStats {
    pub total: usize,
    pub successful: usize,
    pub failed: usize,
    pub timed_out: usize,
    pub mean_solve_time: Option<f64>,
    pub mean_fail_time: Option<f64>,
    /// Over every attempt, timeouts included.
    pub mean_time: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl AttemptStats {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a AttemptRecord>) -> Self {
        let records: Vec<&AttemptRecord> = records.into_iter().collect();
        let of = |o: Outcome| records.iter().filter(move |r| r.outcome == o).map(|r| r.elapsed);
        AttemptStats {
            total: records.len(),
            successful: of(Outcome::Success).count(),
            failed: of(Outcome::Failed).count(),
            timed_out: of(Outcome::TimedOut).count(),
            mean_solve_time: mean(of(Outcome::Success)),
            mean_fail_time: mean(of(Outcome::Failed)),
            mean_time: mean(records.iter().map(|r| r.elapsed)),
        }
    }
}

/// Statistics per template, in template order.
pub fn attempt_table(log: &[AttemptRecord]) -> BTreeMap<TemplateKind, AttemptStats> {
    let mut by: BTreeMap<TemplateKind, Vec<&AttemptRecord>> = BTreeMap::new();
    for r in log {
        by.entry(r.template).or_default().push(r);
    }
    by.into_iter().map(|(k, rs)| (k, AttemptStats::from_records(rs))).collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn attempts_csv(table: &BTreeMap<TemplateKind, AttemptStats>) -> String {
    csv_text(
        ATTEMPTS_HEADER,
        table.iter().map(|(kind, s)| {
            vec![
                kind.name().to_string(),
                s.total.to_string(),
                s.successful.to_string(),
                s.failed.to_string(),
                s.timed_out.to_string(),
                opt(s.mean_solve_time),
                opt(s.mean_fail_time),
                opt(s.mean_time),
            ]
        }),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    pub counts: BTreeMap<CellKey, usize>,
    pub out_of_range: usize,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.values().sum::<usize>() + self.out_of_range
    }
}

/// Per-cell level counts; every cell of `axes` is present.
pub fn histogram(levels: &[TileGrid], catalog: &TileCatalog, axes: &AxesSpec) -> Histogram {
    let mut counts: BTreeMap<CellKey, usize> = axes.cells().map(|c| (c, 0)).collect();
    let mut out_of_range = 0;
    for level in levels {
        match bin_cell(density(level, catalog), difficulty(level, catalog), axes) {
            Some(cell) => *counts.entry(cell).or_default() += 1,
            None => out_of_range += 1,
        }
    }
    Histogram { counts, out_of_range }
}

pub fn histogram_csv(parts: &[(&Histogram, Origin)], axes: &AxesSpec) -> String {
    let mut rows = Vec::new();
    for (hist, origin) in parts {
        for (&cell, count) in &hist.counts {
            let (d, h) = axes.ranges(cell);
            rows.push(vec![d.label(), h.label(), count.to_string(), origin.name().to_string()]);
        }
        let oor = "out_of_range".to_string();
        rows.push(vec![oor.clone(), oor, hist.out_of_range.to_string(), origin.name().to_string()]);
    }
    csv_text(HISTOGRAM_HEADER, rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Initial,
    Generated,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::Initial => "initial",
            Origin::Generated => "generated",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterestRow {
    pub density: usize,
    pub difficulty: usize,
    pub raw: usize,
    pub norm_interest: f64,
    pub origin: Origin,
}

/// Metrics and interestingness per level, normalized over the whole input.
pub fn interestingness_table(
    levels: &[(TileGrid, Origin)],
    catalog: &TileCatalog,
    physics: &PhysicsSpec,
) -> Vec<InterestRow> {
    if levels.is_empty() {
        return Vec::new();
    }
    let raw: Vec<usize> =
        levels.iter().map(|(g, _)| interestingness_raw(&find_path(g, catalog, physics))).collect();
    let norm = normalize(&raw.iter().map(|&r| r as f64).collect::<Vec<_>>()).expect("non-empty input");
    levels
        .iter()
        .zip(raw.iter().zip(norm))
        .map(|((g, origin), (&raw, norm_interest))| InterestRow {
            density: density(g, catalog),
            difficulty: difficulty(g, catalog),
            raw,
            norm_interest,
            origin: *origin,
        })
        .collect()
}

pub fn interestingness_csv(rows: &[InterestRow]) -> String {
    csv_text(
        INTERESTINGNESS_HEADER,
        rows.iter().map(|r| {
            vec![
                r.density.to_string(),
                r.difficulty.to_string(),
                r.norm_interest.to_string(),
                r.origin.name().to_string(),
            ]
        }),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct TileFrequencyGrid {
    pub width: usize,
    pub height: usize,
    /// Row-major, one map per position.
    pub fractions: Vec<BTreeMap<TileId, f64>>,
}

impl TileFrequencyGrid {
    pub fn at(&self, col: usize, row: usize) -> &BTreeMap<TileId, f64> {
        &self.fractions[row * self.width + col]
    }
}

pub fn tile_frequency(levels: &[TileGrid]) -> Result<TileFrequencyGrid> {
    let first = levels.first().ok_or(Error::EmptyLevelSet)?;
    let (width, height) = (first.width(), first.height());
    if levels.iter().any(|g| g.width() != width || g.height() != height) {
        return Err(Error::DimensionMismatch);
    }
    let mut counts: Vec<BTreeMap<TileId, usize>> = vec![BTreeMap::new(); width * height];
    for g in levels {
        for (slot, &t) in counts.iter_mut().zip(g.cells()) {
            *slot.entry(t).or_default() += 1;
        }
    }
    let n = levels.len() as f64;
    let fractions = counts
        .into_iter()
        .map(|m| m.into_iter().map(|(t, c)| (t, c as f64 / n)).collect())
        .collect();
    Ok(TileFrequencyGrid { width, height, fractions })
}

pub fn tilefreq_csv(freq: &TileFrequencyGrid, catalog: &TileCatalog) -> String {
    let mut rows = Vec::new();
    for row in 0..freq.height {
        for col in 0..freq.width {
            for (&t, f) in freq.at(col, row) {
                let ch = catalog.ch(t).unwrap_or('#');
                rows.push(vec![row.to_string(), col.to_string(), ch.to_string(), f.to_string()]);
            }
        }
    }
    csv_text(TILEFREQ_HEADER, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_level;
    use crate::metrics::Axis;

    fn rec(outcome: Outcome, elapsed: f64) -> AttemptRecord {
        AttemptRecord {
            cell: Some(CellKey::new(0, 0)),
            template: TemplateKind::Ring,
            seed: 0,
            outcome,
            elapsed,
            level: None,
            density: None,
            difficulty: None,
        }
    }

    #[test]
    fn attempt_arithmetic() {
        let log = vec![rec(Outcome::Success, 2.0), rec(Outcome::Success, 4.0), rec(Outcome::Failed, 6.0)];
        let s = &attempt_table(&log)[&TemplateKind::Ring];
        assert_eq!((s.total, s.successful, s.failed, s.timed_out), (3, 2, 1, 0));
        assert_eq!((s.mean_solve_time, s.mean_fail_time, s.mean_time), (Some(3.0), Some(6.0), Some(4.0)));
        let csv = attempts_csv(&attempt_table(&log));
        assert_eq!(csv, format!("{ATTEMPTS_HEADER}\nring,3,2,1,0,3,6,4\n"));
    }

    #[test]
    fn empty_log_has_absent_means() {
        let s = AttemptStats::from_records(&[]);
        assert_eq!(s, AttemptStats::default());
        assert!(attempt_table(&[]).is_empty());
        let only_timeouts = AttemptStats::from_records(&[rec(Outcome::TimedOut, 9.0)]);
        assert_eq!((only_timeouts.mean_solve_time, only_timeouts.mean_time), (None, Some(9.0)));
        let csv = attempts_csv(&BTreeMap::from([(TemplateKind::Block2, only_timeouts)]));
        assert!(csv.ends_with("block2,1,0,0,1,,,9\n"));
    }

    #[test]
    fn histogram_bins_and_tally() {
        let cat = TileCatalog::smb();
        let axes = AxesSpec::default();
        let empty = histogram(&[], &cat, &axes);
        assert_eq!((empty.total(), empty.counts.len()), (0, 80));
        // one enemy plus two bottom-row gaps: density 1, difficulty 3
        let g = parse_level("E--\nX--", &cat).unwrap();
        let h = histogram(std::slice::from_ref(&g), &cat, &axes);
        assert_eq!(h.counts[&CellKey::new(0, 1)], 1);
        let tiny = AxesSpec::new(Axis { min: 0, max: 1, bin_width: 1 }, Axis { min: 0, max: 1, bin_width: 1 }).unwrap();
        let h = histogram(&[g], &cat, &tiny);
        assert_eq!((h.out_of_range, h.total()), (1, 1));
        let csv = histogram_csv(&[(&h, Origin::Generated)], &tiny);
        assert_eq!(csv, format!("{HISTOGRAM_HEADER}\n0-1,0-1,0,generated\nout_of_range,out_of_range,1,generated\n"));
    }

    #[test]
    fn interestingness_normalizes_over_input() {
        let cat = TileCatalog::smb();
        let phys = PhysicsSpec::default();
        let flat = parse_level("-----\nXXXXX", &cat).unwrap();
        let sky = parse_level("-----\n-----", &cat).unwrap();
        let rows = interestingness_table(&[(flat, Origin::Initial), (sky, Origin::Generated)], &cat, &phys);
        assert_eq!((rows[0].raw, rows[0].norm_interest), (4, 1.0));
        assert_eq!((rows[1].raw, rows[1].norm_interest), (0, 0.0));
        assert_eq!(rows[0].origin, Origin::Initial);
        let csv = interestingness_csv(&rows);
        assert_eq!(csv, format!("{INTERESTINGNESS_HEADER}\n5,0,1,initial\n0,5,0,generated\n"));
        assert!(interestingness_table(&[], &cat, &phys).is_empty());
    }

    #[test]
    fn tile_frequency_examples() {
        let cat = TileCatalog::smb();
        let a = parse_level("-X", &cat).unwrap();
        let f = tile_frequency(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(f.at(1, 0), &BTreeMap::from([(cat.id('X').unwrap(), 1.0)]));
        let b = parse_level("EX", &cat).unwrap();
        let f = tile_frequency(&[a, b]).unwrap();
        assert_eq!(f.at(0, 0), &BTreeMap::from([(cat.id('-').unwrap(), 0.5), (cat.id('E').unwrap(), 0.5)]));
        assert_eq!(tilefreq_csv(&f, &cat), format!("{TILEFREQ_HEADER}\n0,0,-,0.5\n0,0,E,0.5\n0,1,X,1\n"));
        assert!(matches!(tile_frequency(&[]), Err(Error::EmptyLevelSet)));
        let comma = TileCatalog::new([(',', vec![crate::corpus::Category::Background])]).unwrap();
        let g = parse_level(",", &comma).unwrap();
        let f = tile_frequency(&[g]).unwrap();
        assert_eq!(tilefreq_csv(&f, &comma), format!("{TILEFREQ_HEADER}\n0,0,\",\",1\n"));
        let tall = parse_level("-\n-", &cat).unwrap();
        let wide = parse_level("--", &cat).unwrap();
        assert!(matches!(tile_frequency(&[tall, wide]), Err(Error::DimensionMismatch)));
    }
}
