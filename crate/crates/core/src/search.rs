//! Exact ruler search by depth-first branch and bound.
//!
//! Marks are placed left to right, so the first solution reached is the
//! lexicographically smallest one. Two cuts keep the tree small:
//!
//! * a counting cut: `k` unplaced marks can add at most `k*p + k(k-1)/2`
//!   new lags next to `p` placed ones, so a node is dropped when more lags
//!   are still missing;
//! * symmetry cuts: linear rulers keep their first gap no wider than their
//!   last gap (reflection), circular rulers start at a narrowest gap
//!   (rotation), which also bounds every later gap from below.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::bounds;
use crate::error::{domain, Result};
use crate::sets::{IndexSet, Ruler, RulerKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_nodes: Option<u64>,
    pub time_limit: Option<Duration>,
    pub parallel_width: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget::unlimited()
    }
}

impl SearchBudget {
    pub fn unlimited() -> Self {
        SearchBudget {
            max_nodes: None,
            time_limit: None,
            parallel_width: 1,
        }
    }

    pub fn with_max_nodes(mut self, nodes: u64) -> Self {
        self.max_nodes = Some(nodes.max(1));
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn with_parallel_width(mut self, width: usize) -> Self {
        self.parallel_width = width.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Optimal,
    Feasible,
    Infeasible,
    BudgetExceeded,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub ruler: Option<Ruler>,
    pub status: SearchStatus,
    pub nodes_explored: u64,
    pub elapsed: Duration,
}

impl SearchResult {
    pub fn cardinality(&self) -> Option<usize> {
        self.ruler.as_ref().map(Ruler::cardinality)
    }
}

impl Serialize for SearchResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Record<'a> {
            status: SearchStatus,
            ruler: Option<&'a Ruler>,
            nodes: u64,
            seconds: f64,
        }
        Record {
            status: self.status,
            ruler: self.ruler.as_ref(),
            nodes: self.nodes_explored,
            seconds: self.elapsed.as_secs_f64(),
        }
        .serialize(s)
    }
}

/// Shared limits and counters for one search invocation.
struct Control {
    deadline: Option<Instant>,
    max_nodes: Option<u64>,
    nodes: AtomicU64,
    exceeded: AtomicBool,
    /// Index of the leftmost top-level branch known to hold a solution.
    best_branch: AtomicUsize,
}

const FLUSH_EVERY: u64 = 1 << 12;

impl Control {
    fn new(budget: &SearchBudget, start: Instant) -> Self {
        Control {
            deadline: budget.time_limit.map(|t| start + t),
            max_nodes: budget.max_nodes,
            nodes: AtomicU64::new(0),
            exceeded: AtomicBool::new(false),
            best_branch: AtomicUsize::new(usize::MAX),
        }
    }

    /// Adds locally counted nodes; returns false once a limit is hit.
    fn flush(&self, local: u64) -> bool {
        let total = self.nodes.fetch_add(local, Ordering::Relaxed) + local;
        let over_nodes = self.max_nodes.is_some_and(|m| total >= m);
        let over_time = self.deadline.is_some_and(|d| Instant::now() >= d);
        if over_nodes || over_time {
            self.exceeded.store(true, Ordering::Relaxed);
        }
        !self.exceeded.load(Ordering::Relaxed)
    }
}

enum Outcome {
    Found(Vec<usize>),
    Exhausted,
    Aborted,
}

/// Fixed-width bit rows, one per search depth.
struct LagRows {
    words: usize,
    data: Vec<u64>,
}

impl LagRows {
    fn new(bits: usize, depth: usize) -> Self {
        let words = bits.div_ceil(64).max(1);
        LagRows {
            words,
            data: vec![0; words * (depth + 1)],
        }
    }

    fn row(&self, level: usize) -> &[u64] {
        &self.data[level * self.words..(level + 1) * self.words]
    }

    fn copy_down(&mut self, level: usize) {
        let w = self.words;
        self.data.copy_within(level * w..(level + 1) * w, (level + 1) * w);
    }

    /// Sets bit `i` in row `level`; returns true if it was clear.
    #[inline]
    fn set(&mut self, level: usize, i: usize) -> bool {
        let word = &mut self.data[level * self.words + i / 64];
        let mask = 1u64 << (i % 64);
        let fresh = *word & mask == 0;
        *word |= mask;
        fresh
    }

    /// Highest clear bit below `limit` in row `level`.
    fn highest_clear(&self, level: usize, limit: usize) -> Option<usize> {
        let row = self.row(level);
        (0..limit).rev().find(|&i| row[i / 64] >> (i % 64) & 1 == 0)
    }
}

fn capacity(remaining: usize, placed: usize) -> usize {
    remaining * placed + remaining * remaining.saturating_sub(1) / 2
}

/// Worker state for a linear search of one top-level branch.
struct LinearWorker<'a> {
    length: usize,
    ctl: &'a Control,
    branch: usize,
    rows: LagRows,
    marks: Vec<usize>,
    local_nodes: u64,
}

impl LinearWorker<'_> {
    fn tick(&mut self) -> bool {
        self.local_nodes += 1;
        if self.local_nodes >= FLUSH_EVERY {
            let n = std::mem::take(&mut self.local_nodes);
            if !self.ctl.flush(n) {
                return false;
            }
            if self.ctl.best_branch.load(Ordering::Relaxed) < self.branch {
                return false;
            }
        }
        true
    }

    /// Places mark `x` into row `level + 1`; returns the number of new lags.
    fn place(&mut self, level: usize, x: usize) -> usize {
        self.rows.copy_down(level);
        let mut fresh = 0;
        for i in 0..self.marks.len() {
            let d = self.marks[i].abs_diff(x);
            fresh += self.rows.set(level + 1, d) as usize;
        }
        self.marks.push(x);
        fresh
    }

    /// Can the largest missing lags still be produced once marks are only
    /// allowed in `(last, ceiling]`?
    fn reachable(&self, level: usize, last: usize, ceiling: usize) -> bool {
        let len = self.length;
        let mut limit = len + 1;
        while let Some(d) = self.rows.highest_clear(level, limit) {
            if d < len - last {
                return true;
            }
            // Only pairs (a, a + d) with a placed and a + d a future mark remain.
            let ok = self.marks.iter().any(|&a| a + d > last && a + d <= ceiling);
            if !ok {
                return false;
            }
            limit = d;
        }
        true
    }

    /// `covered` counts set lags in row `level`; `free` marks remain.
    fn dfs(&mut self, level: usize, covered: usize, free: usize, first_gap: usize) -> Outcome {
        if !self.tick() {
            return Outcome::Aborted;
        }
        let len = self.length;
        if free == 0 {
            return if covered == len + 1 {
                let mut m = self.marks.clone();
                m.sort_unstable();
                Outcome::Found(m)
            } else {
                Outcome::Exhausted
            };
        }
        let last = *self.marks.last().unwrap();
        let ceiling = len - first_gap;
        let hi = ceiling.min(len - free);
        for x in last + 1..=hi {
            let fresh = self.place(level, x);
            let covered = covered + fresh;
            let rem = free - 1;
            // placed marks now include 0, len and everything up to x
            let ok = len + 1 - covered <= capacity(rem, self.marks.len())
                && (rem == 0 || self.reachable(level + 1, x, ceiling));
            let out = if ok {
                self.dfs(level + 1, covered, rem, first_gap)
            } else {
                Outcome::Exhausted
            };
            self.marks.pop();
            match out {
                Outcome::Exhausted => {}
                other => return other,
            }
        }
        Outcome::Exhausted
    }
}

/// Worker state for a circular search of one top-level branch.
struct CircularWorker<'a> {
    modulus: usize,
    half: usize,
    ctl: &'a Control,
    branch: usize,
    rows: LagRows,
    marks: Vec<usize>,
    local_nodes: u64,
}

impl CircularWorker<'_> {
    fn tick(&mut self) -> bool {
        self.local_nodes += 1;
        if self.local_nodes >= FLUSH_EVERY {
            let n = std::mem::take(&mut self.local_nodes);
            if !self.ctl.flush(n) {
                return false;
            }
            if self.ctl.best_branch.load(Ordering::Relaxed) < self.branch {
                return false;
            }
        }
        true
    }

    fn place(&mut self, level: usize, x: usize) -> usize {
        self.rows.copy_down(level);
        let n = self.modulus;
        let mut fresh = 0;
        for i in 0..self.marks.len() {
            let d = x - self.marks[i];
            fresh += self.rows.set(level + 1, d.min(n - d)) as usize;
        }
        self.marks.push(x);
        fresh
    }

    /// Lags are folded onto `0..=modulus/2`; `covered` counts them.
    fn dfs(&mut self, level: usize, covered: usize, free: usize, gap: usize) -> Outcome {
        if !self.tick() {
            return Outcome::Aborted;
        }
        let target = self.half + 1;
        if free == 0 {
            return if covered == target {
                Outcome::Found(self.marks.clone())
            } else {
                Outcome::Exhausted
            };
        }
        let n = self.modulus;
        let last = *self.marks.last().unwrap();
        // the remaining free marks and the closing gap are all >= gap
        let Some(hi) = n.checked_sub(free * gap) else {
            return Outcome::Exhausted;
        };
        let mut x = last + gap;
        while x <= hi {
            let fresh = self.place(level, x);
            let covered = covered + fresh;
            let rem = free - 1;
            let out = if target - covered <= capacity(rem, self.marks.len()) {
                self.dfs(level + 1, covered, rem, gap)
            } else {
                Outcome::Exhausted
            };
            self.marks.pop();
            match out {
                Outcome::Exhausted => {}
                other => return other,
            }
            x += 1;
        }
        Outcome::Exhausted
    }
}

/// Search for a ruler of the given length with exactly `cardinality` marks.
pub fn exists_ruler(
    length: usize,
    cardinality: usize,
    kind: RulerKind,
    budget: &SearchBudget,
) -> Result<SearchResult> {
    let start = Instant::now();
    let ctl = Control::new(budget, start);
    let found = exists_with(length, cardinality, kind, budget, &ctl)?;
    Ok(finish(found, &ctl, start, length, kind, SearchStatus::Feasible))
}

fn finish(
    found: Option<Vec<usize>>,
    ctl: &Control,
    start: Instant,
    length: usize,
    kind: RulerKind,
    success: SearchStatus,
) -> SearchResult {
    let nodes_explored = ctl.nodes.load(Ordering::Relaxed);
    let elapsed = start.elapsed();
    match found {
        Some(marks) => {
            let ruler = Ruler::new(IndexSet::new(marks), length, kind).expect("marks within range");
            debug_assert!(ruler.verify());
            SearchResult {
                ruler: Some(ruler),
                status: success,
                nodes_explored,
                elapsed,
            }
        }
        None => SearchResult {
            ruler: None,
            status: if ctl.exceeded.load(Ordering::Relaxed) {
                SearchStatus::BudgetExceeded
            } else {
                SearchStatus::Infeasible
            },
            nodes_explored,
            elapsed,
        },
    }
}

fn exists_with(
    length: usize,
    cardinality: usize,
    kind: RulerKind,
    budget: &SearchBudget,
    ctl: &Control,
) -> Result<Option<Vec<usize>>> {
    if cardinality == 0 {
        return domain("cardinality must be at least 1");
    }
    if cardinality > length + 1 {
        return domain(format!(
            "cardinality {cardinality} exceeds the {} available positions",
            length + 1
        ));
    }
    if ctl.exceeded.load(Ordering::Relaxed) {
        return Ok(None);
    }
    ctl.best_branch.store(usize::MAX, Ordering::Relaxed);
    let found = match kind {
        RulerKind::Linear => linear_search(length, cardinality, budget, ctl),
        RulerKind::Circular => circular_search(length + 1, cardinality, budget, ctl),
    };
    Ok(found)
}

fn linear_search(
    length: usize,
    cardinality: usize,
    budget: &SearchBudget,
    ctl: &Control,
) -> Option<Vec<usize>> {
    match cardinality {
        1 => return (length == 0).then(|| vec![0]),
        2 => return (length == 1).then(|| vec![0, 1]),
        _ => {}
    }
    let free = cardinality - 2;
    // first free mark = first gap, at most half the length (reflection cut)
    let branches: Vec<usize> = (1..=(length / 2).min(length - free)).collect();
    let run = |(idx, &g): (usize, &usize)| -> Option<Vec<usize>> {
        let mut w = LinearWorker {
            length,
            ctl,
            branch: idx,
            rows: LagRows::new(length + 1, free + 1),
            marks: vec![0, length],
            local_nodes: 0,
        };
        w.rows.set(0, 0);
        w.rows.set(0, length);
        let covered = 2;
        let fresh = w.place(0, g);
        let rem = free - 1;
        let ok = length + 1 - (covered + fresh) <= capacity(rem, w.marks.len())
            && (rem == 0 || w.reachable(1, g, length - g));
        let out = if ok {
            w.dfs(1, covered + fresh, rem, g)
        } else {
            Outcome::Exhausted
        };
        ctl.flush(w.local_nodes + 1);
        branch_result(out, idx, ctl)
    };
    fan_out(&branches, budget, run)
}

fn circular_search(
    modulus: usize,
    cardinality: usize,
    budget: &SearchBudget,
    ctl: &Control,
) -> Option<Vec<usize>> {
    if cardinality == 1 {
        return (modulus == 1).then(|| vec![0]);
    }
    let half = modulus / 2;
    // all `cardinality` gaps are at least the first one
    let branches: Vec<usize> = (1..=modulus / cardinality).collect();
    let run = |(idx, &g): (usize, &usize)| -> Option<Vec<usize>> {
        let mut w = CircularWorker {
            modulus,
            half,
            ctl,
            branch: idx,
            rows: LagRows::new(half + 1, cardinality),
            marks: vec![0],
            local_nodes: 0,
        };
        w.rows.set(0, 0);
        let fresh = w.place(0, g);
        let rem = cardinality - 2;
        let out = if half + 1 - (1 + fresh) <= capacity(rem, 2) {
            w.dfs(1, 1 + fresh, rem, g)
        } else {
            Outcome::Exhausted
        };
        ctl.flush(w.local_nodes + 1);
        branch_result(out, idx, ctl)
    };
    fan_out(&branches, budget, run)
}

fn branch_result(out: Outcome, idx: usize, ctl: &Control) -> Option<Vec<usize>> {
    match out {
        Outcome::Found(m) => {
            ctl.best_branch.fetch_min(idx, Ordering::Relaxed);
            Some(m)
        }
        Outcome::Exhausted | Outcome::Aborted => None,
    }
}

/// Runs top-level branches in order; the leftmost success wins regardless
/// of the worker count.
fn fan_out<F>(branches: &[usize], budget: &SearchBudget, run: F) -> Option<Vec<usize>>
where
    F: Fn((usize, &usize)) -> Option<Vec<usize>> + Sync + Send,
{
    if budget.parallel_width <= 1 || branches.len() <= 1 {
        return branches.iter().enumerate().find_map(run);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(budget.parallel_width)
        .build()
        .expect("thread pool");
    pool.install(|| branches.par_iter().enumerate().find_map_first(run))
}

/// Smallest-cardinality ruler of the given length, scanning upward from the
/// closed-form lower bound.
pub fn minimal_ruler(length: usize, kind: RulerKind, budget: &SearchBudget) -> SearchResult {
    let start = Instant::now();
    let ctl = Control::new(budget, start);
    let lower = bounds::cardinality_bounds(length, kind).lower;
    for m in lower.max(1)..=length + 1 {
        let found = exists_with(length, m, kind, budget, &ctl).expect("cardinality in range");
        if found.is_some() {
            return finish(found, &ctl, start, length, kind, SearchStatus::Optimal);
        }
        if ctl.exceeded.load(Ordering::Relaxed) {
            break;
        }
    }
    finish(None, &ctl, start, length, kind, SearchStatus::Optimal)
}
