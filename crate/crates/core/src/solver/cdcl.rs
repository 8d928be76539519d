//! Conflict-driven clause learning with two watched literals, 1UIP learning,
//! VSIDS branching, phase saving, Luby restarts and LBD-based clause deletion.
//!
//! All randomness (initial phases, activity tie-breaks, occasional random
//! decisions) comes from a ChaCha stream seeded by the caller.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UNDEF: u8 = 2;
const NO_REASON: u32 = u32::MAX;
const RANDOM_DECISION_FREQ: f64 = 0.02;
const RESTART_UNIT: u64 = 64;
const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;

#[inline]
fn var_of(lit: u32) -> usize {
    (lit >> 1) as usize
}

#[inline]
fn is_neg(lit: u32) -> bool {
    lit & 1 == 1
}

fn from_dimacs(l: i32) -> u32 {
    let v = l.unsigned_abs() - 1;
    2 * v + u32::from(l < 0)
}

#[derive(Clone, Copy)]
struct Watch {
    cref: u32,
    blocker: u32,
}

struct Clause {
    lits: Vec<u32>,
    learnt: bool,
    deleted: bool,
    lbd: u32,
    activity: f64,
}

/// Max-heap of variables keyed by activity.
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<usize>,
}

impl VarHeap {
    const ABSENT: usize = usize::MAX;

    fn new(n: usize) -> Self {
        VarHeap { heap: Vec::with_capacity(n), pos: vec![Self::ABSENT; n] }
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v] != Self::ABSENT
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v] = self.heap.len();
        self.heap.push(v as u32);
        self.up(self.heap.len() - 1, act);
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            self.up(self.pos[v], act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()? as usize;
        let last = self.heap.pop().unwrap();
        self.pos[top] = Self::ABSENT;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.down(0, act);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if act[p as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let left = 2 * i + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len()
                && act[self.heap[right] as usize] > act[self.heap[left] as usize]
            {
                right
            } else {
                left
            };
            let c = self.heap[child];
            if act[c as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = c;
            self.pos[c as usize] = i;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }
}

pub(crate) enum Answer {
    Sat(Vec<bool>),
    Unsat,
    Timeout,
}

pub(crate) struct Cdcl {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<u32>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    learnts: Vec<u32>,
    max_learnts: f64,
    rng: ChaCha8Rng,
    unsat: bool,
    pending_units: Vec<u32>,
    pub(crate) conflicts: u64,
}

impl Cdcl {
    pub(crate) fn new(num_vars: usize, clauses: &[Vec<i32>], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let activity: Vec<f64> = (0..num_vars).map(|_| rng.gen::<f64>() * 1e-5).collect();
        let phase: Vec<bool> = (0..num_vars).map(|_| rng.gen()).collect();
        let mut s = Cdcl {
            clauses: Vec::with_capacity(clauses.len()),
            watches: vec![Vec::new(); 2 * num_vars],
            assigns: vec![UNDEF; num_vars],
            level: vec![0; num_vars],
            reason: vec![NO_REASON; num_vars],
            trail: Vec::with_capacity(num_vars),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::new(num_vars),
            phase,
            seen: vec![false; num_vars],
            learnts: Vec::new(),
            max_learnts: (clauses.len() as f64 / 3.0).max(2000.0),
            rng,
            unsat: false,
            pending_units: Vec::new(),
            conflicts: 0,
        };
        for v in 0..num_vars {
            s.heap.insert(v, &s.activity);
        }
        for c in clauses {
            s.add_input_clause(c);
        }
        s
    }

    fn add_input_clause(&mut self, clause: &[i32]) {
        let mut lits: Vec<u32> = clause.iter().map(|&l| from_dimacs(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) {
            return;
        }
        match lits.len() {
            0 => self.unsat = true,
            1 => self.pending_units.push(lits[0]),
            _ => {
                let cref = self.clauses.len() as u32;
                self.attach(cref, &lits);
                self.clauses.push(Clause { lits, learnt: false, deleted: false, lbd: 0, activity: 0.0 });
            }
        }
    }

    fn attach(&mut self, cref: u32, lits: &[u32]) {
        self.watches[lits[0] as usize].push(Watch { cref, blocker: lits[1] });
        self.watches[lits[1] as usize].push(Watch { cref, blocker: lits[0] });
    }

    #[inline]
    fn value(&self, lit: u32) -> u8 {
        let a = self.assigns[var_of(lit)];
        if a == UNDEF {
            UNDEF
        } else {
            a ^ (lit & 1) as u8
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, lit: u32, reason: u32) {
        let v = var_of(lit);
        self.assigns[v] = u8::from(!is_neg(lit));
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                let kept = Watch { cref: w.cref, blocker: first };
                if first != w.blocker && self.value(first) == 1 {
                    ws[j] = kept;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                let len = self.clauses[cref].lits.len();
                for k in 2..len {
                    let l = self.clauses[cref].lits[k];
                    let a = self.assigns[var_of(l)];
                    if a == UNDEF || a ^ (l & 1) as u8 == 1 {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[l as usize].push(kept);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = kept;
                j += 1;
                if self.value(first) == 0 {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: usize) {
        let c = &mut self.clauses[cref];
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first, highest remaining level second) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<u32>, u32) {
        let mut learnt = vec![0u32];
        let mut path = 0;
        let mut p: Option<u32> = None;
        let mut index = self.trail.len();
        let current = self.decision_level();
        loop {
            let cref = confl as usize;
            if self.clauses[cref].learnt {
                self.bump_clause(cref);
            }
            let start = usize::from(p.is_some());
            for k in start..self.clauses[cref].lits.len() {
                let q = self.clauses[cref].lits[k];
                let v = var_of(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[var_of(self.trail[index])] {
                    break;
                }
            }
            let lit = self.trail[index];
            let v = var_of(lit);
            self.seen[v] = false;
            p = Some(lit);
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[v];
        }
        learnt[0] = p.unwrap() ^ 1;

        // drop literals implied by the rest of the clause
        let before = learnt.clone();
        let mut kept = vec![learnt[0]];
        for &q in &learnt[1..] {
            let r = self.reason[var_of(q)];
            let redundant = r != NO_REASON
                && self.clauses[r as usize].lits[1..].iter().all(|&x| {
                    let xv = var_of(x);
                    self.seen[xv] || self.level[xv] == 0
                });
            if !redundant {
                kept.push(q);
            }
        }
        for &q in &before {
            self.seen[var_of(q)] = false;
        }
        learnt = kept;

        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for k in 2..learnt.len() {
                if self.level[var_of(learnt[k])] > self.level[var_of(learnt[max_i])] {
                    max_i = k;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[var_of(learnt[1])];
        }
        (learnt, bt)
    }

    fn lbd(&self, lits: &[u32]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|&l| self.level[var_of(l)]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for k in (lim..self.trail.len()).rev() {
            let lit = self.trail[k];
            let v = var_of(lit);
            self.phase[v] = !is_neg(lit);
            self.assigns[v] = UNDEF;
            self.reason[v] = NO_REASON;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<u32> {
        if !self.heap.heap.is_empty() && self.rng.gen_bool(RANDOM_DECISION_FREQ) {
            let k = self.rng.gen_range(0..self.heap.heap.len());
            let v = self.heap.heap[k] as usize;
            if self.assigns[v] == UNDEF {
                return Some(2 * v as u32 + u32::from(!self.phase[v]));
            }
        }
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                return Some(2 * v as u32 + u32::from(!self.phase[v]));
            }
        }
        None
    }

    fn locked(&self, cref: u32) -> bool {
        let first = self.clauses[cref as usize].lits[0];
        let v = var_of(first);
        self.reason[v] == cref && self.value(first) == 1
    }

    fn reduce_db(&mut self) {
        let mut order: Vec<u32> = self.learnts.clone();
        order.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            cb.lbd.cmp(&ca.lbd).then(ca.activity.total_cmp(&cb.activity))
        });
        let target = order.len() / 2;
        let mut removed = 0;
        for &cref in &order {
            if removed >= target {
                break;
            }
            let c = &self.clauses[cref as usize];
            if c.lbd <= 2 || c.lits.len() <= 2 || self.locked(cref) {
                continue;
            }
            let c = &mut self.clauses[cref as usize];
            c.deleted = true;
            c.lits = Vec::new();
            removed += 1;
        }
        let clauses = &self.clauses;
        self.learnts.retain(|&c| !clauses[c as usize].deleted);
        for ws in &mut self.watches {
            ws.retain(|w| !clauses[w.cref as usize].deleted);
        }
    }

    fn luby(mut x: u64) -> u64 {
        let (mut size, mut seq) = (1u64, 0u32);
        while size < x + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != x {
            size = (size - 1) >> 1;
            seq -= 1;
            x %= size;
        }
        1 << seq
    }

    pub(crate) fn solve(&mut self, deadline: Option<Instant>) -> Answer {
        if self.unsat {
            return Answer::Unsat;
        }
        for lit in std::mem::take(&mut self.pending_units) {
            match self.value(lit) {
                0 => return Answer::Unsat,
                1 => {}
                _ => self.enqueue(lit, NO_REASON),
            }
        }
        let mut restarts = 0u64;
        let mut restart_budget = Self::luby(0) * RESTART_UNIT;
        let mut since_restart = 0u64;
        let mut tick = 0u32;
        loop {
            tick = tick.wrapping_add(1);
            if tick.is_multiple_of(32) {
                if let Some(d) = deadline {
                    if Instant::now() >= d {
                        return Answer::Timeout;
                    }
                }
            }
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    return Answer::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let lbd = self.lbd(&learnt);
                    let cref = self.clauses.len() as u32;
                    self.attach(cref, &learnt);
                    let first = learnt[0];
                    self.clauses.push(Clause { lits: learnt, learnt: true, deleted: false, lbd, activity: 0.0 });
                    self.bump_clause(cref as usize);
                    self.learnts.push(cref);
                    self.enqueue(first, cref);
                }
                self.var_inc /= VAR_DECAY;
                self.cla_inc /= CLAUSE_DECAY;
            } else {
                if since_restart >= restart_budget {
                    restarts += 1;
                    since_restart = 0;
                    restart_budget = Self::luby(restarts) * RESTART_UNIT;
                    self.cancel_until(0);
                    continue;
                }
                if self.learnts.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                    self.max_learnts *= 1.1;
                }
                match self.pick_branch() {
                    None => {
                        let model = self.assigns.iter().map(|&a| a == 1).collect();
                        return Answer::Sat(model);
                    }
                    Some(lit) => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(lit, NO_REASON);
                    }
                }
            }
        }
    }
}
