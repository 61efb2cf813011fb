//! Deterministic sparse-ruler constructions.
//!
//! Linear rulers come from Wichmann's segment pattern
//! `1^r, r+1, (2r+1)^r, (4r+3)^s, (2r+2)^(r+1), 1^r`, which spans
//! `4r(r+s+2) + 3(s+1)` with `4r+s+3` marks, and from a table of
//! Wichmann-like recipes (fixed end segments around a run of equal
//! segments). Lengths between pattern lengths are reached by shortening
//! segments of a longer pattern or by appending marks to a shorter one, then
//! greedily patching and thinning the mark set. Short lengths are solved
//! exactly; where every pattern misses the `ceil(sqrt(3 n))` target a bounded
//! covering search around an arithmetic run is tried.

use crate::bounds::linear_upper_bound;
use crate::search::{minimal_ruler, SearchBudget};
use crate::sets::{IndexSet, Ruler, RulerKind};

/// Lengths below this are always solved exactly.
const EXHAUSTIVE_BELOW: usize = 14;

/// Segment widths of the Wichmann ruler `W(r, s)`.
pub fn wichmann_segments(r: usize, s: usize) -> Vec<usize> {
    let mut seg = Vec::with_capacity(4 * r + s + 2);
    seg.extend(std::iter::repeat_n(1, r));
    seg.push(r + 1);
    seg.extend(std::iter::repeat_n(2 * r + 1, r));
    seg.extend(std::iter::repeat_n(4 * r + 3, s));
    seg.extend(std::iter::repeat_n(2 * r + 2, r + 1));
    seg.extend(std::iter::repeat_n(1, r));
    seg
}

pub fn wichmann_length(r: usize, s: usize) -> usize {
    4 * r * (r + s + 2) + 3 * (s + 1)
}

fn marks_from_segments(seg: &[usize]) -> Vec<usize> {
    let mut marks = Vec::with_capacity(seg.len() + 1);
    let mut pos = 0;
    marks.push(0);
    for &w in seg {
        pos += w;
        marks.push(pos);
    }
    marks
}

/// Lag coverage of a sorted mark list, truncated to `0..=len`.
struct Coverage {
    hit: Vec<u32>,
    missing: usize,
}

impl Coverage {
    fn new(marks: &[usize], len: usize) -> Self {
        let mut c = Coverage {
            hit: vec![0; len + 1],
            missing: len + 1,
        };
        for (i, &a) in marks.iter().enumerate() {
            for &b in &marks[..=i] {
                c.bump(a - b);
            }
        }
        c
    }

    fn bump(&mut self, d: usize) {
        if let Some(h) = self.hit.get_mut(d) {
            if *h == 0 {
                self.missing -= 1;
            }
            *h += 1;
        }
    }

    fn drop_lag(&mut self, d: usize) {
        if let Some(h) = self.hit.get_mut(d) {
            *h -= 1;
            if *h == 0 {
                self.missing += 1;
            }
        }
    }

    fn gain(&self, marks: &[usize], x: usize) -> usize {
        let mut seen = Vec::with_capacity(marks.len());
        for &a in marks {
            let d = a.abs_diff(x);
            if d < self.hit.len() && self.hit[d] == 0 && !seen.contains(&d) {
                seen.push(d);
            }
        }
        seen.len()
    }
}

/// Adds marks until every lag up to `len` is covered, then drops marks that
/// are not needed. Always returns a valid ruler of length `len`.
fn patch(mut marks: Vec<usize>, len: usize) -> Vec<usize> {
    marks.retain(|&m| m <= len);
    marks.push(0);
    marks.push(len);
    marks.sort_unstable();
    marks.dedup();
    let mut cov = Coverage::new(&marks, len);
    while cov.missing > 0 {
        let d = (0..=len).rev().find(|&d| cov.hit[d] == 0).unwrap();
        let mut best: Option<(usize, usize)> = None;
        for &a in &marks {
            for x in [a.checked_add(d), a.checked_sub(d)].into_iter().flatten() {
                if x > len || marks.binary_search(&x).is_ok() {
                    continue;
                }
                let g = cov.gain(&marks, x);
                if best.is_none_or(|(bg, bx)| g > bg || (g == bg && x < bx)) {
                    best = Some((g, x));
                }
            }
        }
        let (_, x) = best.expect("lag d is always reachable from mark 0");
        for &a in &marks {
            cov.bump(a.abs_diff(x));
        }
        let at = marks.binary_search(&x).unwrap_err();
        marks.insert(at, x);
    }
    // thin out redundant interior marks, right to left
    let mut i = marks.len();
    while i > 0 {
        i -= 1;
        let x = marks[i];
        if x == 0 || x == len {
            continue;
        }
        for (j, &a) in marks.iter().enumerate() {
            if j != i {
                cov.drop_lag(a.abs_diff(x));
            }
        }
        if cov.missing == 0 {
            marks.remove(i);
        } else {
            for (j, &a) in marks.iter().enumerate() {
                if j != i {
                    cov.bump(a.abs_diff(x));
                }
            }
        }
    }
    marks
}

/// Depth-first completion of `seed` to a ruler of length `len` with at most
/// `max_marks` marks. Each node covers the largest missing lag with some
/// pair `(a, a + d)`, trying pairs that need one new mark before pairs that
/// need two. Gives up after `node_limit` nodes.
fn cover_search(seed: &[usize], len: usize, max_marks: usize, node_limit: u64) -> Option<Vec<usize>> {
    let mut marks: Vec<usize> = seed.to_vec();
    marks.extend([0, len]);
    marks.sort_unstable();
    marks.dedup();
    if marks.len() > max_marks {
        return None;
    }
    let cov = Coverage::new(&marks, len);
    let mut on = vec![false; len + 1];
    for &m in &marks {
        on[m] = true;
    }
    let mut st = CoverState {
        len,
        max_marks,
        marks,
        on,
        cov,
        nodes: 0,
        node_limit,
    };
    if st.dfs() {
        st.marks.sort_unstable();
        Some(st.marks)
    } else {
        None
    }
}

struct CoverState {
    len: usize,
    max_marks: usize,
    marks: Vec<usize>,
    on: Vec<bool>,
    cov: Coverage,
    nodes: u64,
    node_limit: u64,
}

impl CoverState {
    fn add(&mut self, x: usize) {
        for &a in &self.marks {
            self.cov.bump(a.abs_diff(x));
        }
        self.cov.bump(0);
        self.marks.push(x);
        self.on[x] = true;
    }

    fn remove_last(&mut self) {
        let x = self.marks.pop().unwrap();
        self.on[x] = false;
        self.cov.drop_lag(0);
        for &a in &self.marks {
            self.cov.drop_lag(a.abs_diff(x));
        }
    }

    fn dfs(&mut self) -> bool {
        if self.cov.missing == 0 {
            return true;
        }
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return false;
        }
        let free = self.max_marks - self.marks.len();
        if free == 0 {
            return false;
        }
        let p = self.marks.len();
        if free * p + free * (free - 1) / 2 < self.cov.missing {
            return false;
        }
        let d = (0..=self.len).rev().find(|&d| self.cov.hit[d] == 0).unwrap();
        let mut single: Vec<(usize, usize)> = Vec::new();
        let mut double: Vec<usize> = Vec::new();
        for a in 0..=self.len - d {
            match (self.on[a], self.on[a + d]) {
                (true, true) => unreachable!("lag {d} is missing"),
                (true, false) => single.push((self.cov.gain(&self.marks, a + d), a + d)),
                (false, true) => single.push((self.cov.gain(&self.marks, a), a)),
                (false, false) => double.push(a),
            }
        }
        single.sort_unstable_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
        single.dedup_by_key(|x| x.1);
        for &(_, x) in &single {
            self.add(x);
            if self.dfs() {
                return true;
            }
            self.remove_last();
            if self.nodes > self.node_limit {
                return false;
            }
        }
        if free >= 2 {
            for a in double {
                self.add(a);
                self.add(a + d);
                if self.dfs() {
                    return true;
                }
                self.remove_last();
                self.remove_last();
                if self.nodes > self.node_limit {
                    return false;
                }
            }
        }
        false
    }
}

fn reflected(marks: &[usize], len: usize) -> Vec<usize> {
    marks.iter().rev().map(|&m| len - m).collect()
}

/// End segments around an arithmetic block of `step`-wide segments.
pub struct Recipe {
    pub left: &'static [usize],
    pub step: usize,
    pub right: &'static [usize],
}

const RECIPES: &[Recipe] = &[
    Recipe { left: &[1, 3, 2, 1, 2], step: 10, right: &[7, 4, 3, 2] },
    Recipe { left: &[1, 3, 3, 1, 7, 1, 20], step: 5, right: &[13, 2, 2, 2] },
    Recipe { left: &[1, 3, 2, 1, 3], step: 11, right: &[8, 4, 1, 3, 2] },
    Recipe { left: &[1, 3, 1, 4, 4], step: 11, right: &[3, 7, 6, 1, 1] },
    Recipe { left: &[1, 3, 1, 5, 1, 4], step: 12, right: &[6, 2, 5, 6, 2] },
    Recipe { left: &[1, 1, 7, 7, 1], step: 13, right: &[6, 6, 6, 2, 2, 1, 1] },
    Recipe { left: &[1, 1, 7, 7, 7, 7], step: 13, right: &[6, 6, 6, 2, 2, 1, 1] },
    Recipe { left: &[1, 2, 6, 6, 8, 1], step: 13, right: &[5, 2, 5, 4, 1, 2] },
    Recipe { left: &[1, 2, 7, 1, 8], step: 14, right: &[6, 1, 5, 12, 1, 2, 2, 2] },
    Recipe { left: &[1, 6, 3, 2, 1, 6, 6], step: 14, right: &[8, 8, 1, 2, 2, 2] },
    Recipe { left: &[2, 3, 2, 7, 5, 7, 5], step: 15, right: &[3, 7, 3, 6, 2, 1, 1] },
    Recipe { left: &[1, 2, 3, 1, 6, 6, 6], step: 15, right: &[11, 4, 5, 9, 9, 5, 3, 1] },
    Recipe { left: &[1, 2, 2, 2, 2, 9, 9, 9], step: 16, right: &[7, 7, 7, 1, 2, 2, 2] },
];

/// Segment patterns whose length is within `slack` of `len`: Wichmann
/// rulers, and Wichmann rulers with one extra segment inside the
/// `(4r+3)` block.
fn base_patterns(len: usize, slack: usize, recipes: &[Recipe]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for rec in recipes {
        let ends: usize = rec.left.iter().chain(rec.right).sum();
        for s in 1.. {
            let w = ends + s * rec.step;
            if w > len + slack {
                break;
            }
            if w + slack >= len {
                let mut seg = rec.left.to_vec();
                seg.extend(std::iter::repeat_n(rec.step, s));
                seg.extend_from_slice(rec.right);
                out.push(seg);
            }
        }
    }
    for r in 0.. {
        if wichmann_length(r, 0) > len + slack {
            break;
        }
        for s in 0.. {
            let w = wichmann_length(r, s);
            if w > len + slack {
                break;
            }
            let seg = wichmann_segments(r, s);
            let block = 2 * r + 1;
            let mut widths = vec![2 * r + 1, 2 * r + 2];
            if w < len && len - w <= 4 * r + 3 && !widths.contains(&(len - w)) {
                widths.push(len - w);
            }
            for x in widths {
                if w + x + slack < len || w + x > len + slack {
                    continue;
                }
                for at in block..=block + s {
                    let mut s2 = seg.clone();
                    s2.insert(at, x);
                    out.push(s2);
                }
            }
            if w + slack >= len {
                out.push(seg);
            }
        }
    }
    out
}

/// Candidate rulers of length `len` derived from the base patterns.
fn wichmann_candidates(len: usize) -> Vec<Vec<usize>> {
    candidates_with(len, RECIPES)
}

fn candidates_with(len: usize, recipes: &[Recipe]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let slack = 2 * len.isqrt() + 8;
    for seg in base_patterns(len, slack, recipes) {
        let w: usize = seg.iter().sum();
        let marks = marks_from_segments(&seg);
        if w <= len {
            out.push(patch(marks.clone(), len));
            let shifted: Vec<usize> = marks.iter().map(|m| m + (len - w)).collect();
            out.push(patch(shifted, len));
            continue;
        }
        let cut = w - len;
        // shorten one segment (first and last occurrence of each width)
        let mut tried = Vec::new();
        for (i, &width) in seg.iter().enumerate() {
            if width <= cut || tried.contains(&width) {
                continue;
            }
            tried.push(width);
            let mut s2 = seg.clone();
            s2[i] -= cut;
            out.push(patch(marks_from_segments(&s2), len));
            let last = seg.iter().rposition(|&x| x == width).unwrap();
            if last != i {
                let mut s3 = seg.clone();
                s3[last] -= cut;
                out.push(patch(marks_from_segments(&s3), len));
            }
        }
        // or split the cut over two segments
        let mut spots: Vec<usize> = Vec::new();
        for &width in &tried {
            spots.push(seg.iter().position(|&x| x == width).unwrap());
            spots.push(seg.iter().rposition(|&x| x == width).unwrap());
        }
        spots.sort_unstable();
        spots.dedup();
        for (a, &i) in spots.iter().enumerate() {
            for &j in &spots[a + 1..] {
                for c in 1..cut {
                    if seg[i] > c && seg[j] > cut - c {
                        let mut s2 = seg.clone();
                        s2[i] -= c;
                        s2[j] -= cut - c;
                        out.push(patch(marks_from_segments(&s2), len));
                    }
                }
            }
        }
        out.push(patch(marks.clone(), len));
        out.push(patch(reflected(&marks, w), len));
    }
    out
}

fn best_wichmann(len: usize) -> Option<Vec<usize>> {
    wichmann_candidates(len)
        .into_iter()
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
}

/// Completion of an arithmetic run of marks by [`cover_search`], trying
/// steps near the Wichmann block width for the target cardinality.
fn arithmetic_completion(len: usize, max_marks: usize) -> Option<Vec<usize>> {
    const NODE_LIMIT: u64 = 3_000;
    const MAX_SEEDS: usize = 400;
    let mut seeds = 0;
    let d0 = 4 * max_marks.saturating_sub(3) / 6 + 3;
    let mut steps: Vec<usize> = (d0.saturating_sub(3)..=d0 + 3).filter(|&d| d > 0).collect();
    steps.sort_by_key(|&d| d.abs_diff(d0));
    for &d in &steps {
        for s in (max_marks / 3..max_marks.saturating_sub(4)).rev() {
            if s * d > len {
                continue;
            }
            for p in 0..=len - s * d {
                seeds += 1;
                if seeds > MAX_SEEDS {
                    return None;
                }
                let seed: Vec<usize> = (0..=s).map(|k| p + k * d).collect();
                if let Some(m) = cover_search(&seed, len, max_marks, NODE_LIMIT) {
                    return Some(m);
                }
            }
        }
    }
    None
}

/// A verified linear ruler of the given length. Up to length 200 it has at
/// most `ceil(sqrt(3 length))` marks (for `length >= 3`); beyond that a few
/// lengths may need one more.
pub fn construct_near_minimal_linear(length: usize) -> Ruler {
    if length < EXHAUSTIVE_BELOW {
        let r = minimal_ruler(length, RulerKind::Linear, &SearchBudget::unlimited());
        return r.ruler.expect("unlimited search always concludes");
    }
    let target = linear_upper_bound(length);
    let mut marks = best_wichmann(length).expect("family covers every length");
    if marks.len() > target {
        if let Some(m) = arithmetic_completion(length, target) {
            marks = m;
        }
    }
    Ruler::linear(IndexSet::new(marks), length).expect("marks within range")
}

/// Circular ruler of the given length built from a linear ruler spanning
/// `floor((length + 1) / 2)`: every residue `d` or its complement
/// `length + 1 - d` is then a linear lag.
pub fn circular_from_half_linear(length: usize) -> Ruler {
    let half = length.div_ceil(2);
    let base = half_linear_ruler(half);
    Ruler::circular(base.marks().clone(), length).expect("half ruler fits")
}

/// Minimal linear ruler for the half-length embedding; exact search is
/// cheap at these sizes, the construction takes over beyond.
fn half_linear_ruler(half: usize) -> Ruler {
    const EXACT_UP_TO: usize = 40;
    if half <= EXACT_UP_TO {
        minimal_ruler(half, RulerKind::Linear, &SearchBudget::unlimited())
            .ruler
            .expect("unlimited search always concludes")
    } else {
        construct_near_minimal_linear(half)
    }
}
