//! Document listing: range-encoded inverted lists per rule, per-node
//! run-length minimum structures, and the scan/jump listing algorithm.
//!
//! For wavelet node v with labels A1..Aq, let L be the concatenation of the
//! document lists of A1..Aq and E its previous-occurrence table. Only two
//! derived structures are kept: `marks` (list starts within L) and a
//! run-length range-minimum header over E. A document is new in a range
//! exactly when its E entry precedes the range, and because E grows inside
//! each nondecreasing run, the minimum of any E range sits either at the
//! range's left end or at a run head; that supports the listing walk below
//! without storing L or E.
//!
//! `range_distinct` reports the distinct documents of one node range that a
//! prior query state has not already reported. It alternates two modes:
//! scanning forward while documents are new, and, upon hitting a repeat,
//! jumping to the minimal run head in the rest of the range. A repeat at
//! the minimal head proves the remaining documents were all found, because
//! heads are visited in increasing order of their E values. Two marker sets
//! drive this: `seen` (documents met in the current range; controls the
//! stops) and `reported` (documents output across the whole query). Both
//! are caller-provided scratch; `seen` must be cleared between ranges.

use crate::collection::Collection;
use crate::error::{Error, Result};
use crate::grammar::Rule;
use crate::index::{PatternIndex, ShortCounts};
use crate::succinct::{prev_occurrence_table, BitVector, RunLengthRmq, ScratchSet};
use crate::BuildOptions;
use std::collections::HashMap;

/// Ascending document set stored as maximal ranges `[lo, hi]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RangeList {
    ranges: Vec<(u32, u32)>,
    /// Documents covered by ranges[0..k], for positional access.
    cum: Vec<u32>,
}

impl RangeList {
    pub fn new() -> RangeList {
        RangeList::default()
    }

    pub fn from_ranges(ranges: Vec<(u32, u32)>) -> Result<RangeList> {
        let mut rl = RangeList::new();
        for &(lo, hi) in &ranges {
            if lo > hi || rl.ranges.last().is_some_and(|&(_, ph)| lo <= ph + 1) {
                return Err(Error::Corrupt("document ranges must be increasing and separated".into()));
            }
            rl.ranges.push((lo, hi));
            rl.cum.push(rl.cum.last().unwrap_or(&0) + (hi - lo + 1));
        }
        Ok(rl)
    }

    /// Adds document `d`; documents must arrive in ascending order.
    pub fn push_doc(&mut self, d: u32) {
        if let Some((_, hi)) = self.ranges.last_mut() {
            assert!(d >= *hi, "documents must be pushed in order");
            if d == *hi {
                return;
            }
            if d == *hi + 1 {
                *hi = d;
                *self.cum.last_mut().unwrap() += 1;
                return;
            }
        }
        self.ranges.push((d, d));
        self.cum.push(self.cum.last().unwrap_or(&0) + 1);
    }

    /// Number of documents covered.
    pub fn len(&self) -> usize {
        *self.cum.last().unwrap_or(&0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// The `i`-th document, 1-based.
    pub fn get(&self, i: usize) -> u32 {
        debug_assert!(1 <= i && i <= self.len());
        let k = self.cum.partition_point(|&c| (c as usize) < i);
        let (lo, _) = self.ranges[k];
        let before = if k == 0 { 0 } else { self.cum[k - 1] };
        lo + (i as u32 - before - 1)
    }

    pub fn contains(&self, d: u32) -> bool {
        let k = self.ranges.partition_point(|&(_, hi)| hi < d);
        k < self.ranges.len() && self.ranges[k].0 <= d
    }

    pub fn ranges(&self) -> &[(u32, u32)] {
        &self.ranges
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.ranges.iter().flat_map(|&(lo, hi)| lo..=hi)
    }

    pub fn size_bits(&self) -> usize {
        self.ranges.len() * 64 + self.cum.len() * 32
    }
}

/// Stored answers for patterns no longer than the metasymbol length: total
/// occurrence count and document set per short string.
#[derive(Debug, Default)]
pub struct ShortTable {
    /// Sorted by string for binary search and deterministic serialization.
    entries: Vec<(Vec<u8>, u64, RangeList)>,
}

impl ShortTable {
    pub fn build(docs: &[Vec<u8>], ms_len: usize) -> ShortTable {
        let mut map: HashMap<&[u8], (u64, RangeList)> = HashMap::new();
        for (i, doc) in docs.iter().enumerate() {
            let d = i as u32 + 1;
            for start in 0..doc.len() {
                for l in 1..=ms_len.min(doc.len() - start) {
                    let e = map.entry(&doc[start..start + l]).or_default();
                    e.0 += 1;
                    e.1.push_doc(d);
                }
            }
        }
        let mut entries: Vec<(Vec<u8>, u64, RangeList)> =
            map.into_iter().map(|(k, (c, rl))| (k.to_vec(), c, rl)).collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        ShortTable { entries }
    }

    pub fn from_entries(entries: Vec<(Vec<u8>, u64, RangeList)>) -> Result<ShortTable> {
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Corrupt("short table entries must be sorted and unique".into()));
        }
        Ok(ShortTable { entries })
    }

    pub fn entries(&self) -> &[(Vec<u8>, u64, RangeList)] {
        &self.entries
    }

    fn find(&self, pattern: &[u8]) -> Option<&(Vec<u8>, u64, RangeList)> {
        self.entries
            .binary_search_by(|e| e.0.as_slice().cmp(pattern))
            .ok()
            .map(|k| &self.entries[k])
    }

    pub fn docs(&self, pattern: &[u8]) -> Option<&RangeList> {
        self.find(pattern).map(|e| &e.2)
    }

    pub fn size_bits(&self) -> usize {
        self.entries
            .iter()
            .map(|(s, _, rl)| s.len() * 8 + 64 + rl.size_bits())
            .sum()
    }
}

impl ShortCounts for ShortTable {
    fn total(&self, pattern: &[u8]) -> u64 {
        self.find(pattern).map_or(0, |e| e.1)
    }
}

/// Per wavelet node: list boundaries within L and the run-length minimum
/// header over E. Empty nodes store None.
pub(crate) struct NodeDocs {
    pub(crate) marks: BitVector,
    pub(crate) heads: Option<RunLengthRmq>,
}

/// Walk instrumentation for one listing query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ListingStats {
    /// Run-head minimum queries issued.
    pub rmq_calls: usize,
    /// Lists entered: one per scan start plus one per head inspection.
    pub lists_opened: usize,
    /// Documents read during forward scans.
    pub elements_scanned: usize,
    /// Wavelet node ranges processed.
    pub nodes_visited: usize,
}

/// Result of a listing query.
#[derive(Clone, Debug, Default)]
pub struct ListingResult {
    /// Documents containing the pattern, ascending.
    pub docs: Vec<u32>,
    /// The same documents in the order the walk discovered them.
    pub discovery: Vec<u32>,
    pub stats: ListingStats,
}

pub struct DocIndex {
    pub(crate) nodes: Vec<NodeDocs>,
    /// Document list per grammar rule.
    pub(crate) lists: Vec<RangeList>,
    pub(crate) short: Option<ShortTable>,
    pub(crate) ndocs: u32,
}

impl DocIndex {
    pub fn build(pattern: &PatternIndex, collection: &Collection, options: &BuildOptions) -> Result<DocIndex> {
        let g = pattern.grammar();
        if collection.num_docs() != g.num_docs() {
            return Err(Error::Build("collection does not match the grammar".into()));
        }
        // Document list per rule: one stamped DFS per document.
        let nr = g.num_rules();
        let mut lists = vec![RangeList::new(); nr];
        let mut stamp = vec![0u32; nr];
        let mut stack: Vec<u32> = Vec::new();
        for d in 1..=g.num_docs() {
            stack.push(g.start(d));
            while let Some(id) = stack.pop() {
                if std::mem::replace(&mut stamp[id as usize], d) == d {
                    continue;
                }
                lists[id as usize].push_doc(d);
                if let Rule::Node(b, c) = g.rule(id) {
                    stack.push(*b);
                    stack.push(*c);
                }
            }
        }
        let short = if g.ms_len() > 1 {
            Some(ShortTable::build(collection.documents(), g.ms_len()))
        } else {
            None
        };
        Self::assemble(pattern, lists, short, g.num_docs(), options)
    }

    /// Builds the per-node structures from the rule lists; shared with
    /// deserialization, where the transient L and E arrays are rebuilt.
    pub(crate) fn assemble(
        pattern: &PatternIndex,
        lists: Vec<RangeList>,
        short: Option<ShortTable>,
        ndocs: u32,
        _options: &BuildOptions,
    ) -> Result<DocIndex> {
        let grid = pattern.grid();
        let mut nodes = Vec::with_capacity(grid.num_nodes());
        for seq in grid.node_label_sequences() {
            let mut l: Vec<u32> = Vec::new();
            let mut mark_positions: Vec<usize> = Vec::new();
            for &label in &seq {
                let list = lists
                    .get(label as usize)
                    .ok_or_else(|| Error::Corrupt("grid label outside the grammar".into()))?;
                if list.is_empty() {
                    return Err(Error::Corrupt("grid label with empty document list".into()));
                }
                mark_positions.push(l.len() + 1);
                l.extend(list.iter());
            }
            let heads = if l.is_empty() {
                None
            } else {
                let e = prev_occurrence_table(&l);
                Some(RunLengthRmq::new(&e))
            };
            nodes.push(NodeDocs {
                marks: BitVector::from_positions(l.len(), &mark_positions),
                heads,
            });
        }
        Ok(DocIndex {
            nodes,
            lists,
            short,
            ndocs,
        })
    }

    pub fn num_docs(&self) -> u32 {
        self.ndocs
    }

    /// Runs of node `v`'s previous-occurrence table; None for empty nodes.
    pub fn node_runs(&self, v: usize) -> Option<usize> {
        self.nodes[v].heads.as_ref().map(|h| h.runs())
    }

    pub fn short_table(&self) -> Option<&ShortTable> {
        self.short.as_ref()
    }

    pub fn rule_docs(&self, rule: u32) -> &RangeList {
        &self.lists[rule as usize]
    }

    pub(crate) fn rule_lists(&self) -> &[RangeList] {
        &self.lists
    }

    /// The document at position `x` of node v's virtual L array.
    fn doc_at(&self, pattern: &PatternIndex, v: usize, x: usize) -> u32 {
        let marks = &self.nodes[v].marks;
        let t = marks.rank1(x);
        let u = x - marks.select1(t).expect("t counted marks") + 1;
        let label = pattern.grid().point_at(v, t).0;
        self.lists[label as usize].get(u)
    }

    /// Reports the distinct documents of elements `[lo, hi]` of wavelet node
    /// `v` that are not in `reported`, appending them to `out` and to
    /// `reported`. `seen` is per-range scratch: it must be empty on entry
    /// and cleared by the caller afterwards. Equivalent to scanning the
    /// range's document lists and removing `reported`.
    #[allow(clippy::too_many_arguments)]
    pub fn range_distinct(
        &self,
        pattern: &PatternIndex,
        v: usize,
        lo: usize,
        hi: usize,
        seen: &mut ScratchSet,
        reported: &mut ScratchSet,
        stats: &mut ListingStats,
        out: &mut Vec<u32>,
    ) {
        debug_assert!(seen.is_empty(), "per-range scratch must start empty");
        if lo > hi {
            return;
        }
        stats.nodes_visited += 1;
        let node = &self.nodes[v];
        let q = node.marks.count_ones();
        debug_assert!(1 <= lo && hi <= q);
        let i = node.marks.select1(lo).expect("range within node");
        let j = if hi < q {
            node.marks.select1(hi + 1).expect("next list start") - 1
        } else {
            node.marks.len()
        };
        let mut walk = Walk {
            doc: self,
            pattern,
            v,
            seen,
            reported,
            stats,
            out,
        };
        walk.scan(i, j);
    }

    /// Documents containing `pattern`, with discovery order and counters.
    pub fn list(&self, pattern: &PatternIndex, pat: &[u8]) -> Result<ListingResult> {
        let m = pat.len();
        if m == 0 {
            return Err(Error::Params("pattern must be nonempty".into()));
        }
        let g = pattern.grammar();
        let ms = g.ms_len();
        let mut res = ListingResult::default();
        if m == 1 && ms == 1 {
            if let Some(t) = pattern.byte_leaf(pat[0]) {
                res.discovery = self.lists[t as usize].iter().collect();
                res.stats.lists_opened = 1;
                res.stats.elements_scanned = res.discovery.len();
            }
        } else if m <= ms {
            let table = self.short.as_ref().expect("short table built with long metasymbols");
            if let Some(rl) = table.docs(pat) {
                res.discovery = rl.iter().collect();
                res.stats.lists_opened = 1;
                res.stats.elements_scanned = res.discovery.len();
            }
        } else {
            let mut seen = ScratchSet::new(self.ndocs as usize);
            let mut reported = ScratchSet::new(self.ndocs as usize);
            // Labels whose whole list was already consumed this query.
            let mut drained: HashMap<u32, ()> = HashMap::new();
            for k in 1..m {
                let Some((x1, x2, y1, y2)) = pattern.primary_rect(&pat[..k], &pat[k..]) else {
                    continue;
                };
                for r in pattern.grid().decompose(x1, x2, y1, y2) {
                    if r.lo == r.hi {
                        // A single-element range covers one whole list; scan
                        // it without stop logic, once per label.
                        res.stats.lists_opened += 1;
                        res.stats.nodes_visited += 1;
                        let label = pattern.grid().point_at(r.node, r.lo).0;
                        if drained.insert(label, ()).is_some() {
                            continue;
                        }
                        for d in self.lists[label as usize].iter() {
                            res.stats.elements_scanned += 1;
                            if reported.insert(d) {
                                res.discovery.push(d);
                            }
                        }
                    } else {
                        self.range_distinct(
                            pattern,
                            r.node,
                            r.lo,
                            r.hi,
                            &mut seen,
                            &mut reported,
                            &mut res.stats,
                            &mut res.discovery,
                        );
                        seen.clear();
                    }
                }
            }
        }
        res.docs = res.discovery.clone();
        res.docs.sort_unstable();
        Ok(res)
    }

    /// Total bits of the stored document structures.
    pub fn size_bits(&self) -> u64 {
        let mut bits: u64 = self.lists.iter().map(|l| l.size_bits() as u64).sum();
        for n in &self.nodes {
            bits += n.marks.size_bits() as u64;
            if let Some(h) = &n.heads {
                bits += h.size_bits() as u64;
            }
        }
        bits += self.short.as_ref().map_or(0, |s| s.size_bits() as u64);
        bits
    }
}

/// One in-flight range walk; see `range_distinct`.
struct Walk<'a> {
    doc: &'a DocIndex,
    pattern: &'a PatternIndex,
    v: usize,
    seen: &'a mut ScratchSet,
    reported: &'a mut ScratchSet,
    stats: &'a mut ListingStats,
    out: &'a mut Vec<u32>,
}

impl Walk<'_> {
    fn emit(&mut self, d: u32) {
        self.seen.insert(d);
        if self.reported.insert(d) {
            self.out.push(d);
        }
    }

    /// Scan mode: mark documents left to right until one repeats, then
    /// hand the rest of the range to the head jump.
    fn scan(&mut self, i: usize, j: usize) {
        if i > j {
            return;
        }
        self.stats.lists_opened += 1;
        let mut x = i;
        while x <= j {
            let d = self.doc.doc_at(self.pattern, self.v, x);
            self.stats.elements_scanned += 1;
            if self.seen.contains(d) {
                break;
            }
            self.emit(d);
            x += 1;
        }
        if x > j {
            return;
        }
        self.jump(x, j);
    }

    /// Jump mode: `a` holds a repeated document, so any new document in
    /// `[a, b]` lies at or after a run head; probe the minimal one.
    fn jump(&mut self, a: usize, b: usize) {
        if a > b {
            return;
        }
        let heads = self.doc.nodes[self.v].heads.as_ref().expect("nonempty node");
        self.stats.rmq_calls += 1;
        let Some(k) = heads.candidates(a, b).head else {
            // [a, b] sits inside a single run: all previous occurrences of
            // these documents are at or after the range start.
            return;
        };
        let d = self.doc.doc_at(self.pattern, self.v, k);
        self.stats.lists_opened += 1;
        if self.seen.contains(d) {
            // The minimal head repeats, so every remaining document does.
            return;
        }
        self.emit(d);
        self.jump(a, k - 1);
        self.scan(k + 1, b);
    }
}

/// Reference listing for one node range: scans the document lists of the
/// covered labels and removes `prior`. Oracle for `range_distinct`.
pub fn range_distinct_reference(
    doc: &DocIndex,
    pattern: &PatternIndex,
    v: usize,
    lo: usize,
    hi: usize,
    prior: &[u32],
) -> Vec<u32> {
    let mut out = Vec::new();
    let mut seen: Vec<u32> = prior.to_vec();
    for t in lo..=hi {
        let label = pattern.grid().point_at(v, t).0;
        for d in doc.rule_docs(label).iter() {
            if !seen.contains(&d) {
                seen.push(d);
                out.push(d);
            }
        }
    }
    out
}
