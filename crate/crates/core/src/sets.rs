//! Difference-set arithmetic and the ruler types built on it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Sorted, duplicate-free set of non-negative integers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(elements: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = elements.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    /// `{0, 1, ..., n-1}`.
    pub fn range(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn largest(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// True if every element of `self` is in `other`.
    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|x| other.contains(x))
    }
}

impl From<Vec<usize>> for IndexSet {
    fn from(v: Vec<usize>) -> Self {
        IndexSet::new(v)
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        IndexSet::new(iter)
    }
}

impl<const N: usize> From<[usize; N]> for IndexSet {
    fn from(a: [usize; N]) -> Self {
        IndexSet::new(a)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// All non-negative pairwise differences of `a`.
pub fn difference_set(a: &IndexSet) -> IndexSet {
    let Some(max) = a.largest() else {
        return IndexSet::default();
    };
    let hit = lag_hits(a.as_slice(), max + 1, None);
    IndexSet(hit_indices(&hit))
}

/// Differences `(a2 - a1) mod modulus` over all ordered pairs of `a`.
pub fn modular_difference_set(a: &IndexSet, modulus: usize) -> Result<IndexSet> {
    if modulus == 0 {
        return domain("modulus must be at least 1");
    }
    if let Some(max) = a.largest() {
        if max >= modulus {
            return domain(format!("element {max} is not below modulus {modulus}"));
        }
    }
    let hit = lag_hits(a.as_slice(), modulus, Some(modulus));
    Ok(IndexSet(hit_indices(&hit)))
}

fn lag_hits(marks: &[usize], size: usize, modulus: Option<usize>) -> Vec<bool> {
    let mut hit = vec![false; size];
    for (i, &hi) in marks.iter().enumerate() {
        for &lo in &marks[..=i] {
            let d = hi - lo;
            hit[d] = true;
            if let Some(m) = modulus {
                hit[(m - d) % m] = true;
            }
        }
    }
    hit
}

fn hit_indices(hit: &[bool]) -> Vec<usize> {
    hit.iter()
        .enumerate()
        .filter_map(|(i, &h)| h.then_some(i))
        .collect()
}

/// Largest possible size of a (modular) difference set generated by
/// `cardinality` marks.
pub fn max_distinct_differences(cardinality: usize, modular: bool) -> usize {
    match cardinality {
        0 => 0,
        m if modular => m * (m - 1) + 1,
        m => m * (m - 1) / 2 + 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RulerKind {
    Linear,
    Circular,
}

impl fmt::Display for RulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RulerKind::Linear => "linear",
            RulerKind::Circular => "circular",
        })
    }
}

impl std::str::FromStr for RulerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(RulerKind::Linear),
            "circular" => Ok(RulerKind::Circular),
            other => domain(format!("unknown ruler kind `{other}`")),
        }
    }
}

/// Period metadata: `period` marks repeated over `blocks` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Period {
    #[serde(rename = "P")]
    pub period: usize,
    #[serde(rename = "L")]
    pub blocks: usize,
}

/// A mark set together with the span it must cover.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ruler {
    marks: IndexSet,
    length: usize,
    kind: RulerKind,
    period: Option<Period>,
}

impl Ruler {
    pub fn new(marks: IndexSet, length: usize, kind: RulerKind) -> Result<Self> {
        if let Some(max) = marks.largest() {
            if max > length {
                return domain(format!("mark {max} exceeds ruler length {length}"));
            }
        }
        Ok(Ruler {
            marks,
            length,
            kind,
            period: None,
        })
    }

    pub fn linear(marks: impl Into<IndexSet>, length: usize) -> Result<Self> {
        Ruler::new(marks.into(), length, RulerKind::Linear)
    }

    pub fn circular(marks: impl Into<IndexSet>, length: usize) -> Result<Self> {
        Ruler::new(marks.into(), length, RulerKind::Circular)
    }

    /// Attach period metadata; `length + 1` must equal `period * blocks`.
    pub fn with_period(mut self, period: usize, blocks: usize) -> Result<Self> {
        if period == 0 || blocks == 0 {
            return domain("period and block count must be positive");
        }
        if period * blocks != self.length + 1 {
            return domain(format!(
                "period {period} x {blocks} blocks does not match length {}",
                self.length
            ));
        }
        self.period = Some(Period { period, blocks });
        Ok(self)
    }

    pub fn marks(&self) -> &IndexSet {
        &self.marks
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn kind(&self) -> RulerKind {
        self.kind
    }

    pub fn period(&self) -> Option<Period> {
        self.period
    }

    pub fn cardinality(&self) -> usize {
        self.marks.len()
    }

    pub fn verify(&self) -> bool {
        verify_ruler(self)
    }

    pub fn to_record(&self) -> RulerRecord {
        RulerRecord {
            kind: self.kind,
            length: self.length,
            marks: self.marks.as_slice().to_vec(),
            period: self.period,
            cardinality: self.cardinality(),
            verified: self.verify(),
        }
    }
}

/// Serialized form of a [`Ruler`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RulerRecord {
    pub kind: RulerKind,
    pub length: usize,
    pub marks: Vec<usize>,
    pub period: Option<Period>,
    pub cardinality: usize,
    pub verified: bool,
}

impl Serialize for Ruler {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

/// True iff every lag `0..=length` is measured by the marks: linear
/// differences for linear rulers, differences modulo `length + 1` for
/// circular ones. Periodic rulers must also be closed under `+P`.
pub fn verify_ruler(r: &Ruler) -> bool {
    let n = r.length + 1;
    if r.marks.largest().is_some_and(|m| m >= n) {
        return false;
    }
    let hit = match r.kind {
        RulerKind::Linear => lag_hits(r.marks.as_slice(), n, None),
        RulerKind::Circular => lag_hits(r.marks.as_slice(), n, Some(n)),
    };
    if !hit.iter().all(|&h| h) {
        return false;
    }
    match r.period {
        Some(p) => is_shift_closed(&r.marks, p.period, n),
        None => true,
    }
}

fn is_shift_closed(marks: &IndexSet, shift: usize, bound: usize) -> bool {
    marks
        .iter()
        .filter(|m| m + shift < bound)
        .all(|m| marks.contains(m + shift))
}

/// `{ b + k * block_len : b in base, k in 0..blocks }`.
pub fn periodize(base: &IndexSet, block_len: usize, blocks: usize) -> Result<IndexSet> {
    if blocks == 0 {
        return domain("block count must be at least 1");
    }
    if let Some(max) = base.largest() {
        if max >= block_len {
            return domain(format!("base element {max} is not below block length {block_len}"));
        }
    }
    Ok((0..blocks)
        .flat_map(|k| base.iter().map(move |b| b + k * block_len))
        .collect())
}

/// Inverse of [`periodize`]: the marks of the first block, provided the
/// whole set is closed under shifts by `block_len`.
pub fn extract_period(marks: &IndexSet, block_len: usize, blocks: usize) -> Result<IndexSet> {
    if block_len == 0 || blocks == 0 {
        return domain("block length and block count must be positive");
    }
    let bound = block_len * blocks;
    if let Some(max) = marks.largest() {
        if max >= bound {
            return domain(format!("mark {max} outside 0..{bound}"));
        }
    }
    if !is_shift_closed(marks, block_len, bound) {
        return Err(Error::NotPeriodic { block_len, blocks });
    }
    // Closure under +N alone admits sets such as {0, 4, 5} (N = 4); the
    // count check rejects residues that do not start in the first block.
    let base: IndexSet = marks.iter().filter(|&m| m < block_len).collect();
    if base.len() * blocks != marks.len() {
        return Err(Error::NotPeriodic { block_len, blocks });
    }
    Ok(base)
}

/// Mirror image of the ruler: `m -> length - m` (linear) or
/// `m -> -m mod (length + 1)` (circular).
pub fn reflect(r: &Ruler) -> Ruler {
    let n = r.length + 1;
    let marks = match r.kind {
        RulerKind::Linear => r.marks.iter().map(|m| r.length - m).collect(),
        RulerKind::Circular => r.marks.iter().map(|m| (n - m) % n).collect(),
    };
    Ruler { marks, ..r.clone() }
}

/// Circular rotation `m -> (m + shift) mod (length + 1)`.
pub fn rotate(r: &Ruler, shift: usize) -> Result<Ruler> {
    if r.kind != RulerKind::Circular {
        return domain("rotation is only defined for circular rulers");
    }
    let n = r.length + 1;
    let marks = r.marks.iter().map(|m| (m + shift % n) % n).collect();
    Ok(Ruler { marks, ..r.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[usize]) -> IndexSet {
        IndexSet::new(v.iter().copied())
    }

    /// Direct enumeration over ordered pairs, kept separate from `lag_hits`.
    fn brute_differences(a: &[usize], modulus: Option<usize>) -> IndexSet {
        let mut out = Vec::new();
        for &x in a {
            for &y in a {
                match modulus {
                    Some(m) => out.push(((y as i64 - x as i64).rem_euclid(m as i64)) as usize),
                    None if y >= x => out.push(y - x),
                    None => {}
                }
            }
        }
        IndexSet::new(out)
    }

    #[test]
    fn difference_set_examples() {
        assert_eq!(difference_set(&set(&[0, 1, 5])), set(&[0, 1, 4, 5]));
        assert_eq!(difference_set(&set(&[7])), set(&[0]));
        assert_eq!(difference_set(&set(&[0, 1, 2, 3, 6, 10])), IndexSet::range(11));
        assert!(difference_set(&IndexSet::default()).is_empty());
    }

    #[test]
    fn modular_difference_set_examples() {
        assert_eq!(
            modular_difference_set(&set(&[0, 1, 5]), 10).unwrap(),
            set(&[0, 1, 4, 5, 6, 9])
        );
        assert_eq!(modular_difference_set(&set(&[3]), 8).unwrap(), set(&[0]));
        let full = modular_difference_set(&set(&[0, 1, 2, 5]), 11).unwrap();
        assert_eq!(full, brute_differences(&[0, 1, 2, 5], Some(11)));
        assert_eq!(full, IndexSet::range(11));
        assert!(matches!(
            modular_difference_set(&set(&[0, 10]), 10),
            Err(Error::Domain(_))
        ));
        assert!(modular_difference_set(&set(&[0]), 0).is_err());
    }

    #[test]
    fn distinct_difference_capacity() {
        assert_eq!(max_distinct_differences(4, false), 7);
        assert_eq!(max_distinct_differences(4, true), 13);
        assert_eq!(max_distinct_differences(6, false), 16);
        assert_eq!(max_distinct_differences(0, false), 0);
        assert_eq!(max_distinct_differences(1, true), 1);
        assert_eq!(difference_set(&set(&[0, 1, 2, 3, 6, 10])).len(), 11);
    }

    #[test]
    fn verify_examples() {
        assert!(verify_ruler(&Ruler::linear([0, 1, 2, 3, 6, 10], 10).unwrap()));
        assert!(verify_ruler(&Ruler::linear([0, 1, 2, 5, 7, 10], 10).unwrap()));
        assert!(verify_ruler(&Ruler::circular([0, 1, 2, 3, 6, 10], 20).unwrap()));
        assert!(!verify_ruler(&Ruler::linear([0, 2, 10], 10).unwrap()));
        assert!(verify_ruler(&Ruler::linear([0], 0).unwrap()));
        assert!(verify_ruler(&Ruler::circular([0], 0).unwrap()));
        assert!(!verify_ruler(&Ruler::linear(IndexSet::default(), 0).unwrap()));
    }

    #[test]
    fn ruler_rejects_out_of_range_marks() {
        assert!(Ruler::linear([0, 11], 10).is_err());
        assert!(Ruler::linear([0, 3], 3).unwrap().with_period(3, 2).is_err());
    }

    #[test]
    fn periodize_examples() {
        assert_eq!(periodize(&set(&[0, 1, 3]), 4, 2).unwrap(), set(&[0, 1, 3, 4, 5, 7]));
        assert_eq!(periodize(&set(&[0]), 5, 3).unwrap(), set(&[0, 5, 10]));
        let p = periodize(&set(&[0, 1, 2, 5, 7, 10]), 11, 2).unwrap();
        assert_eq!(p.len(), 12);
        let r = Ruler::linear(p, 21).unwrap().with_period(11, 2).unwrap();
        assert!(verify_ruler(&r));
        assert!(periodize(&set(&[4]), 4, 2).is_err());
    }

    #[test]
    fn extract_period_examples() {
        assert_eq!(extract_period(&set(&[0, 1, 3, 4, 5, 7]), 4, 2).unwrap(), set(&[0, 1, 3]));
        assert_eq!(extract_period(&set(&[0, 5, 10]), 5, 3).unwrap(), set(&[0]));
        assert_eq!(
            extract_period(&set(&[0, 1, 4]), 4, 2),
            Err(Error::NotPeriodic { block_len: 4, blocks: 2 })
        );
        // closed under +N but missing the first block copy of 5
        assert!(extract_period(&set(&[0, 4, 5]), 4, 2).is_err());
    }

    #[test]
    fn periodic_verification_checks_closure() {
        let r = Ruler::linear([0, 1, 2, 3, 4, 6, 7], 7).unwrap();
        assert!(verify_ruler(&r));
        assert!(!verify_ruler(&r.clone().with_period(4, 2).unwrap()));
    }

    #[test]
    fn reflect_and_rotate_examples() {
        let r = Ruler::linear([0, 1, 2, 3, 6, 10], 10).unwrap();
        assert_eq!(reflect(&r).marks(), &set(&[0, 4, 7, 8, 9, 10]));
        let c = Ruler::circular([0, 1, 4, 9, 11], 20).unwrap();
        assert_eq!(rotate(&c, 3).unwrap().marks(), &set(&[3, 4, 7, 12, 14]));
        assert_eq!(reflect(&c).marks(), &set(&[0, 10, 12, 17, 20]));
        assert!(rotate(&r, 1).is_err());
    }

    #[test]
    fn ruler_json_shape() {
        let r = Ruler::linear([0, 1, 3], 3).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "kind": "linear", "length": 3, "marks": [0, 1, 3],
                "period": null, "cardinality": 3, "verified": true
            })
        );
        let p = Ruler::linear([0, 1, 2, 3], 3).unwrap().with_period(2, 2).unwrap();
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v["period"], serde_json::json!({"P": 2, "L": 2}));
    }

    fn small_set(max: usize) -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(0..max, 1..10)
    }

    proptest! {
        #[test]
        fn difference_sets_match_enumeration(v in small_set(30), extra in 1usize..10) {
            let a = IndexSet::new(v.clone());
            prop_assert_eq!(difference_set(&a), brute_differences(a.as_slice(), None));
            let m = a.largest().unwrap() + extra;
            let md = modular_difference_set(&a, m).unwrap();
            prop_assert_eq!(&md, &brute_differences(a.as_slice(), Some(m)));
            prop_assert!(difference_set(&a).is_subset(&md));
            prop_assert!(difference_set(&a).len() <= max_distinct_differences(a.len(), false));
            prop_assert!(md.len() <= max_distinct_differences(a.len(), true));
            for d in md.iter().filter(|&d| d != 0) {
                prop_assert!(md.contains(m - d));
            }
        }

        #[test]
        fn verification_invariant_under_reflection(v in small_set(16), len in 0usize..16, shift in 0usize..40) {
            let marks: IndexSet = v.into_iter().filter(|&m| m <= len).collect();
            let lin = Ruler::linear(marks.clone(), len).unwrap();
            prop_assert_eq!(verify_ruler(&reflect(&lin)), verify_ruler(&lin));
            let circ = Ruler::circular(marks, len).unwrap();
            prop_assert_eq!(verify_ruler(&reflect(&circ)), verify_ruler(&circ));
            prop_assert_eq!(verify_ruler(&rotate(&circ, shift).unwrap()), verify_ruler(&circ));
            if verify_ruler(&lin) {
                prop_assert!(lin.marks().contains(0) && lin.marks().contains(len));
                prop_assert!(verify_ruler(&circ));
            }
        }

        #[test]
        fn periodize_extract_roundtrip(v in small_set(12), n in 1usize..12, blocks in 1usize..5) {
            let base: IndexSet = v.into_iter().filter(|&b| b < n).collect();
            let p = periodize(&base, n, blocks).unwrap();
            prop_assert_eq!(p.len(), base.len() * blocks);
            prop_assert_eq!(extract_period(&p, n, blocks).unwrap(), base);
        }

        #[test]
        fn periodic_ruler_iff_base_ruler(v in small_set(12), n in 1usize..12, blocks in 1usize..4) {
            let base: IndexSet = v.into_iter().filter(|&b| b < n).collect();
            let p = periodize(&base, n, blocks).unwrap();
            let len = n * blocks - 1;
            for kind in [RulerKind::Linear, RulerKind::Circular] {
                let whole = Ruler::new(p.clone(), len, kind).unwrap().with_period(n, blocks).unwrap();
                let single = Ruler::new(base.clone(), n - 1, kind).unwrap();
                prop_assert_eq!(verify_ruler(&whole), verify_ruler(&single));
            }
        }
    }
}
