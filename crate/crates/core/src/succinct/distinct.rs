//! Reference algorithms for listing the distinct values of an array range.
//!
//! Both take the classic route over the previous-occurrence array E, where
//! E[k] is the largest l < k with L[l] = L[k] (0 if none): a value's leftmost
//! occurrence in L[i..=j] is exactly a position k with E[k] < i.
//!
//! * [`distinct_rmq`] recurses on range minima of E and never touches more
//!   than 2·ndoc + 1 minima.
//! * [`distinct_marked`] replaces the E-value test by a mark bitvector and
//!   must recurse left before right; marks are undone before returning.
//!
//! These are correctness oracles for the compressed listing index, which
//! reproduces their behaviour without storing L or E.

use super::rmq::Rmq;

/// Bit set over values `1..=capacity` with an undo trail, reused across
/// queries; `clear` resets only the bits that were set.
#[derive(Clone, Debug)]
pub struct ScratchSet {
    words: Vec<u64>,
    trail: Vec<u32>,
}

impl ScratchSet {
    pub fn new(capacity: usize) -> Self {
        ScratchSet {
            words: vec![0; capacity / 64 + 1],
            trail: Vec::new(),
        }
    }

    pub fn contains(&self, v: u32) -> bool {
        self.words[(v as usize - 1) / 64] >> ((v as usize - 1) % 64) & 1 == 1
    }

    /// Marks `v`; returns true if it was newly inserted.
    pub fn insert(&mut self, v: u32) -> bool {
        let (w, b) = ((v as usize - 1) / 64, (v as usize - 1) % 64);
        if self.words[w] >> b & 1 == 1 {
            return false;
        }
        self.words[w] |= 1u64 << b;
        self.trail.push(v);
        true
    }

    pub fn len(&self) -> usize {
        self.trail.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trail.is_empty()
    }

    /// Undoes every insertion since construction or the last clear.
    pub fn clear(&mut self) {
        for v in self.trail.drain(..) {
            self.words[(v as usize - 1) / 64] &= !(1u64 << ((v as usize - 1) % 64));
        }
    }

    pub fn is_all_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
}

/// Distinct values of a range in discovery order, with instrumentation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Distinct {
    /// Values in the order the algorithm discovered them.
    pub values: Vec<u32>,
    /// 1-based position at which each value was reported; for both
    /// algorithms this is the value's leftmost occurrence in the range.
    pub positions: Vec<usize>,
    /// Number of range-minimum queries issued.
    pub rmq_calls: usize,
}

/// Builds the previous-occurrence array E for `l` (entries 0 when absent).
pub fn prev_occurrence_table(l: &[u32]) -> Vec<i64> {
    let mut last = std::collections::HashMap::new();
    let mut e = Vec::with_capacity(l.len());
    for (k, &v) in l.iter().enumerate() {
        e.push(*last.get(&v).unwrap_or(&0));
        last.insert(v, (k + 1) as i64);
    }
    e
}

fn debug_check_entry(l: &[u32], e: &[i64], k: usize) {
    debug_assert!(
        {
            let p = e[k - 1];
            p >= 0
                && (p as usize) < k
                && (p == 0 || l[p as usize - 1] == l[k - 1])
                && (p as usize + 1..k).all(|q| l[q - 1] != l[k - 1])
        },
        "previous-occurrence entry {k} inconsistent with the value array"
    );
}

/// Lists distinct values of `l[i..=j]` by recursive range minima over `e`.
///
/// Reports the minimum position k of each live subrange whenever e[k] falls
/// left of the original range, then splits around k, left side first. An
/// empty logical range (i > j) yields an empty result.
pub fn distinct_rmq(l: &[u32], e: &[i64], q: &Rmq, i: usize, j: usize) -> Distinct {
    assert_eq!(l.len(), e.len());
    assert_eq!(q.len(), e.len());
    let mut out = Distinct::default();
    if i > j {
        return out;
    }
    assert!(i >= 1 && j <= l.len(), "range [{i},{j}] out of bounds");
    let mut stack = vec![(i, j)];
    let mut pending = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        if lo > hi {
            continue;
        }
        let k = q.rmq(lo, hi);
        out.rmq_calls += 1;
        debug_check_entry(l, e, k);
        if e[k - 1] < i as i64 {
            out.values.push(l[k - 1]);
            out.positions.push(k);
            // Left subrange is explored fully before the right one.
            pending.clear();
            pending.push((k + 1, hi));
            pending.push((lo, k - 1));
            for r in pending.drain(..) {
                stack.push(r);
            }
        }
    }
    out
}

/// Lists distinct values of `l[i..=j]` using a mark set instead of E values.
///
/// The minimum position of a subrange is reported unless its value is
/// already marked; recursion goes left before right so that every marked
/// value seen was reported at its leftmost occurrence. `seen` must be empty
/// on entry and is restored to all-zeros before returning. Values must lie
/// in `1..=d`.
pub fn distinct_marked(
    l: &[u32],
    q: &Rmq,
    d: usize,
    i: usize,
    j: usize,
    seen: &mut ScratchSet,
) -> Distinct {
    assert_eq!(q.len(), l.len());
    debug_assert!(seen.is_all_zero(), "scratch set not clear on entry");
    let mut out = Distinct::default();
    if i <= j {
        assert!(i >= 1 && j <= l.len(), "range [{i},{j}] out of bounds");
        mark_recurse(l, q, d, i, j, seen, &mut out);
    }
    seen.clear();
    debug_assert!(seen.is_all_zero(), "scratch set not restored");
    out
}

fn mark_recurse(l: &[u32], q: &Rmq, d: usize, lo: usize, hi: usize, seen: &mut ScratchSet, out: &mut Distinct) {
    if lo > hi {
        return;
    }
    let k = q.rmq(lo, hi);
    out.rmq_calls += 1;
    let v = l[k - 1];
    assert!(v >= 1 && v as usize <= d, "value {v} outside 1..={d}");
    if !seen.insert(v) {
        return;
    }
    out.values.push(v);
    out.positions.push(k);
    mark_recurse(l, q, d, lo, k - 1, seen, out);
    mark_recurse(l, q, d, k + 1, hi, seen, out);
}

/// Lists distinct values of `l[i..=j]` by alternating a left-to-right scan
/// with minimum probes over `e`.
///
/// Scans forward reporting new values until one repeats at d, then probes
/// the minimum E position k of [d, j]: a repeated L[k] proves the rest of
/// the interval holds no unreported value; a new L[k] is reported, followed
/// by recursion on [d, k-1] and then [k+1, j]. `rmq_calls` counts the
/// probes, the algorithm's non-sequential steps; they never exceed
/// 2·(values reported)+1. `seen` must be empty on entry and is restored.
pub fn leftist_distinct(
    l: &[u32],
    e: &[i64],
    q: &Rmq,
    i: usize,
    j: usize,
    seen: &mut ScratchSet,
) -> Distinct {
    assert_eq!(l.len(), e.len());
    assert_eq!(q.len(), e.len());
    debug_assert!(seen.is_all_zero(), "scratch set not clear on entry");
    let mut out = Distinct::default();
    if i <= j {
        assert!(i >= 1 && j <= l.len(), "range [{i},{j}] out of bounds");
        leftist_recurse(l, e, q, i, j, seen, &mut out);
    }
    seen.clear();
    out
}

fn leftist_recurse(l: &[u32], e: &[i64], q: &Rmq, lo: usize, hi: usize, seen: &mut ScratchSet, out: &mut Distinct) {
    let mut d = lo;
    while d <= hi {
        if !seen.insert(l[d - 1]) {
            break;
        }
        out.values.push(l[d - 1]);
        out.positions.push(d);
        d += 1;
    }
    if d > hi {
        return;
    }
    let k = q.rmq(d, hi);
    out.rmq_calls += 1;
    debug_check_entry(l, e, k);
    if !seen.insert(l[k - 1]) {
        // The minimal E in [d, hi] belongs to a repeat, so every value
        // there already occurred at or before its position.
        return;
    }
    out.values.push(l[k - 1]);
    out.positions.push(k);
    leftist_recurse(l, e, q, d, k - 1, seen, out);
    leftist_recurse(l, e, q, k + 1, hi, seen, out);
}

/// Scan oracle: distinct values with their leftmost positions, in order of
/// first appearance.
pub fn distinct_scan(l: &[u32], i: usize, j: usize) -> Vec<(u32, usize)> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    if i > j {
        return out;
    }
    for k in i..=j {
        if seen.insert(l[k - 1]) {
            out.push((l[k - 1], k));
        }
    }
    out
}
