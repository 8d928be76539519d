//! Player paths through a segment under a simple envelope movement model.
//!
//! The player stands on *supported* cells: passable cells whose cell directly
//! below has a support category. From there it can walk one column, step off
//! a ledge and fall to the next support, or jump. A jump reaches any supported
//! landing within `max_jump_span` columns that is at most `max_jump_height`
//! rows higher, provided some apex height `a` (at least 1 and at least the
//! rise, at most `max_jump_height`) leaves a clear corridor: the takeoff column
//! from the takeoff row up to the apex, the apex row across the columns in
//! between, and the landing column from the apex down to the landing. Rows
//! above the grid count as passable.
//!
//! Path length counts tile steps, airborne ones included: a walk is 1, a fall
//! is 1 plus the rows dropped, and a jump is `a` up, `dx` across and the
//! remaining rows down, using the lowest clear apex.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Category, CategorySet, TileCatalog, TileGrid};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicsSpec {
    pub max_jump_height: usize,
    pub max_jump_span: usize,
    pub passable: Vec<Category>,
    pub support: Vec<Category>,
}

impl Default for PhysicsSpec {
    fn default() -> Self {
        PhysicsSpec {
            max_jump_height: 4,
            max_jump_span: 4,
            passable: vec![Category::Passable],
            support: vec![Category::Solid],
        }
    }
}

impl PhysicsSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_jump_height == 0 || self.max_jump_span == 0 {
            return Err("jump height and span must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub col: usize,
    pub row: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Walk,
    Fall,
    Jump,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathResult {
    pub playable: bool,
    pub start: Option<Pos>,
    /// Each entry is the position reached and the move that reached it.
    pub moves: Vec<(Pos, MoveKind)>,
    /// Tile steps along the path.
    pub length: usize,
    pub jumps: usize,
}

impl PathResult {
    fn unplayable() -> Self {
        PathResult::default()
    }

    /// Start followed by every visited position.
    pub fn positions(&self) -> Vec<Pos> {
        self.start.into_iter().chain(self.moves.iter().map(|m| m.0)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

/// Implicit move graph over a grid's supported cells.
pub struct MoveGraph {
    width: usize,
    height: usize,
    passable: Vec<bool>,
    support: Vec<bool>,
    physics: PhysicsSpec,
}

impl MoveGraph {
    pub fn new(grid: &TileGrid, catalog: &TileCatalog, physics: &PhysicsSpec) -> Self {
        let pass = CategorySet::of(&physics.passable);
        let sup = CategorySet::of(&physics.support);
        MoveGraph {
            width: grid.width(),
            height: grid.height(),
            passable: grid.cells().iter().map(|&t| catalog.categories(t).intersects(pass)).collect(),
            support: grid.cells().iter().map(|&t| catalog.categories(t).intersects(sup)).collect(),
            physics: physics.clone(),
        }
    }

    fn open(&self, col: usize, row: isize) -> bool {
        row < 0 || (row < self.height as isize && self.passable[row as usize * self.width + col])
    }

    fn solid_below(&self, col: usize, row: usize) -> bool {
        row + 1 < self.height && self.support[(row + 1) * self.width + col]
    }

    pub fn is_supported(&self, pos: Pos) -> bool {
        self.open(pos.col, pos.row as isize) && self.solid_below(pos.col, pos.row)
    }

    fn step(&self, col: usize, dir: isize) -> Option<usize> {
        let c = col as isize + dir;
        (c >= 0 && c < self.width as isize).then_some(c as usize)
    }

    fn walk(&self, from: Pos, dir: isize) -> Option<Pos> {
        let col = self.step(from.col, dir)?;
        let to = Pos { col, row: from.row };
        self.is_supported(to).then_some(to)
    }

    fn fall(&self, from: Pos, dir: isize) -> Option<Pos> {
        let col = self.step(from.col, dir)?;
        if !self.open(col, from.row as isize) || self.solid_below(col, from.row) {
            return None;
        }
        let mut row = from.row + 1;
        while row < self.height && self.open(col, row as isize) {
            if self.solid_below(col, row) {
                return Some(Pos { col, row });
            }
            row += 1;
        }
        None
    }

    /// Whether a jump from `from` to `to` has a clear corridor for some apex.
    pub fn can_jump(&self, from: Pos, to: Pos) -> bool {
        self.jump_cost(from, to).is_some()
    }

    /// Tile steps of the cheapest clear jump from `from` to `to`.
    pub fn jump_cost(&self, from: Pos, to: Pos) -> Option<usize> {
        let dx = to.col.abs_diff(from.col);
        if dx == 0 || dx > self.physics.max_jump_span || !self.is_supported(from) || !self.is_supported(to) {
            return None;
        }
        let rise = from.row as isize - to.row as isize;
        let max_h = self.physics.max_jump_height as isize;
        let dir: isize = if to.col > from.col { 1 } else { -1 };
        (rise.max(1)..=max_h)
            .find(|&apex| {
                let top = from.row as isize - apex;
                let takeoff_clear = (top..=from.row as isize).all(|r| self.open(from.col, r));
                let middle_clear =
                    (1..dx as isize).all(|k| self.open((from.col as isize + dir * k) as usize, top));
                let landing_clear = (top..=to.row as isize).all(|r| self.open(to.col, r));
                takeoff_clear && middle_clear && landing_clear
            })
            .map(|apex| (2 * apex - rise) as usize + dx)
    }

    /// Tile steps of a single move between supported cells, if legal.
    pub fn move_cost(&self, from: Pos, to: Pos, kind: MoveKind) -> Option<usize> {
        let dir: isize = if to.col > from.col { 1 } else { -1 };
        match kind {
            MoveKind::Walk => (self.walk(from, dir) == Some(to) && self.is_supported(from)).then_some(1),
            MoveKind::Fall => (self.is_supported(from) && self.fall(from, dir) == Some(to)).then(|| 1 + to.row - from.row),
            MoveKind::Jump => self.jump_cost(from, to),
        }
    }

    fn jumps(&self, from: Pos, dir: isize, out: &mut Vec<(Pos, MoveKind, usize)>) {
        for span in 1..=self.physics.max_jump_span as isize {
            let c = from.col as isize + dir * span;
            if c < 0 || c >= self.width as isize {
                break;
            }
            for row in 0..self.height {
                let to = Pos { col: c as usize, row };
                if let Some(cost) = self.jump_cost(from, to) {
                    out.push((to, MoveKind::Jump, cost));
                }
            }
        }
    }

    /// Successors in the fixed tie-break order: walk right, jumps right by
    /// increasing span, falls (right then left), walk left, jumps left.
    /// Each successor carries its tile-step cost.
    pub fn successors(&self, from: Pos) -> Vec<(Pos, MoveKind, usize)> {
        let mut out = Vec::new();
        if !self.is_supported(from) {
            return out;
        }
        let fall = |p: Pos| (p, MoveKind::Fall, 1 + p.row - from.row);
        out.extend(self.walk(from, 1).map(|p| (p, MoveKind::Walk, 1)));
        self.jumps(from, 1, &mut out);
        out.extend(self.fall(from, 1).map(fall));
        out.extend(self.fall(from, -1).map(fall));
        out.extend(self.walk(from, -1).map(|p| (p, MoveKind::Walk, 1)));
        self.jumps(from, -1, &mut out);
        out
    }

    fn supported_in(&self, col: usize) -> Vec<Pos> {
        (0..self.height).map(|row| Pos { col, row }).filter(|&p| self.is_supported(p)).collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }
}

pub fn build_move_graph(grid: &TileGrid, catalog: &TileCatalog, physics: &PhysicsSpec) -> MoveGraph {
    MoveGraph::new(grid, catalog, physics)
}

/// Shortest left-to-right path.
pub fn find_path(grid: &TileGrid, catalog: &TileCatalog, physics: &PhysicsSpec) -> PathResult {
    find_path_directed(grid, catalog, physics, Direction::LeftToRight)
}

/// Cheapest path, in tile steps, from the start edge to the goal edge.
///
/// Starts are the supported cells of the first column on the start side that
/// has any; goals are the supported cells of the opposite edge column. Among
/// equally cheap routes the first one discovered in successor order wins.
pub fn find_path_directed(
    grid: &TileGrid,
    catalog: &TileCatalog,
    physics: &PhysicsSpec,
    direction: Direction,
) -> PathResult {
    let graph = MoveGraph::new(grid, catalog, physics);
    let w = graph.width;
    let cols: Vec<usize> = match direction {
        Direction::LeftToRight => (0..w).collect(),
        Direction::RightToLeft => (0..w).rev().collect(),
    };
    let goal_col = *cols.last().unwrap();
    let Some(starts) = cols.iter().map(|&c| graph.supported_in(c)).find(|s| !s.is_empty()) else {
        return PathResult::unplayable();
    };

    let idx = |p: Pos| p.row * w + p.col;
    let mut parent: Vec<Option<(Pos, MoveKind)>> = vec![None; w * graph.height];
    let mut dist = vec![usize::MAX; w * graph.height];
    let mut done = vec![false; w * graph.height];
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    for &s in &starts {
        dist[idx(s)] = 0;
        heap.push(Reverse((0, seq, s)));
        seq += 1;
    }
    while let Some(Reverse((d, _, p))) = heap.pop() {
        if done[idx(p)] {
            continue;
        }
        done[idx(p)] = true;
        if p.col == goal_col {
            let mut moves = Vec::new();
            let mut cur = p;
            while let Some((prev, kind)) = parent[idx(cur)] {
                moves.push((cur, kind));
                cur = prev;
            }
            moves.reverse();
            let jumps = moves.iter().filter(|m| m.1 == MoveKind::Jump).count();
            return PathResult { playable: true, start: Some(cur), moves, length: d, jumps };
        }
        for (q, kind, cost) in graph.successors(p) {
            let nd = d + cost;
            if nd < dist[idx(q)] {
                dist[idx(q)] = nd;
                parent[idx(q)] = Some((p, kind));
                heap.push(Reverse((nd, seq, q)));
                seq += 1;
            }
        }
    }
    PathResult::unplayable()
}
