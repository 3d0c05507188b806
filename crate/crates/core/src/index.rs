//! Pattern machinery over the grammar: sorted cut orders, the point grid,
//! and count / locate queries.
//!
//! Every binary rule A -> BC cuts its expansion between B and C, giving one
//! grid point: its column is the rank of reverse(exp(B)) among the distinct
//! reversed left expansions, its row the rank of exp(C) among the distinct
//! right expansions, its weight the number of parse tree occurrences of A.
//! An occurrence of P that is not contained in one leaf metasymbol spans
//! exactly one such cut in exactly one rule instance, so for each split
//! P = P1 P2 a rectangle (columns whose expansion ends with P1, rows whose
//! expansion starts with P2) captures each occurrence exactly once: weight
//! sums count them, reported labels seed location.


use crate::error::{Error, Result};
use crate::grammar::{Grammar, Rule};
use crate::grid::{Grid, Layout};
use crate::BuildOptions;
use std::cmp::Ordering;
use std::collections::HashMap;

/// One pattern occurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Occurrence {
    /// 1-based document.
    pub doc: u32,
    /// 1-based offset within the document.
    pub offset: u64,
    /// 1-based offset within the concatenated collection.
    pub global: u64,
}

pub struct PatternIndex {
    grammar: Grammar,
    grid: Grid,
    /// Left child of one rule per grid column, in column order.
    col_reps: Vec<u32>,
    /// Right child of one rule per grid row, in row order.
    row_reps: Vec<u32>,
    occ_counts: Vec<u64>,
    /// For each rule, the rules using it and the offset of the use.
    uses: Vec<Vec<(u32, u64)>>,
    /// Documents served by each start rule.
    start_docs: HashMap<u32, Vec<u32>>,
    /// Leaf rule per byte, when metasymbols are single bytes.
    byte_leaves: HashMap<u8, u32>,
    doc_starts: Vec<u64>,
}

/// Interface to stored per-pattern counts for patterns no longer than the
/// metasymbol length; provided by the document layer.
pub trait ShortCounts {
    fn total(&self, pattern: &[u8]) -> u64;
}

fn cmp_rev_exp(g: &Grammar, a: u32, b: u32) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    g.suffix_rev_bytes(a).cmp(g.suffix_rev_bytes(b))
}

fn cmp_exp(g: &Grammar, a: u32, b: u32) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    g.prefix_bytes(a).cmp(g.prefix_bytes(b))
}

/// Compares the first `key.len()` bytes of `it` against `key`; a shorter
/// stream orders Less, so Equal means the stream starts with `key`.
fn trunc_cmp(mut it: impl Iterator<Item = u8>, key: &[u8]) -> Ordering {
    for &k in key {
        match it.next() {
            None => return Ordering::Less,
            Some(b) => match b.cmp(&k) {
                Ordering::Equal => {}
                other => return other,
            },
        }
    }
    Ordering::Equal
}

impl PatternIndex {
    pub fn build(grammar: Grammar, options: &BuildOptions) -> Result<PatternIndex> {
        let occ_counts = grammar.occurrence_counts();
        let node_ids: Vec<u32> = (0..grammar.num_rules() as u32)
            .filter(|&id| !grammar.is_leaf(id))
            .collect();

        // Root order: by reversed left expansion, ties by rule id.
        let mut order = node_ids.clone();
        order.sort_by(|&a, &b| {
            let (la, lb) = (left_of(&grammar, a), left_of(&grammar, b));
            cmp_rev_exp(&grammar, la, lb).then(a.cmp(&b))
        });
        let mut col_sizes: Vec<u32> = Vec::new();
        let mut col_reps: Vec<u32> = Vec::new();
        for &id in &order {
            let l = left_of(&grammar, id);
            let same = col_reps.last().is_some_and(|&prev| {
                prev == l || grammar.suffix_rev_bytes(prev).eq(grammar.suffix_rev_bytes(l))
            });
            if same {
                *col_sizes.last_mut().unwrap() += 1;
            } else {
                col_sizes.push(1);
                col_reps.push(l);
            }
        }

        // Rows: ranks of distinct right expansions.
        let mut by_right = node_ids.clone();
        by_right.sort_by(|&a, &b| {
            let (ra, rb) = (right_of(&grammar, a), right_of(&grammar, b));
            cmp_exp(&grammar, ra, rb).then(a.cmp(&b))
        });
        let mut row_reps: Vec<u32> = Vec::new();
        let mut row_of_rule: HashMap<u32, u32> = HashMap::new();
        for &id in &by_right {
            let r = right_of(&grammar, id);
            let same = row_reps.last().is_some_and(|&prev| {
                prev == r || grammar.prefix_bytes(prev).eq(grammar.prefix_bytes(r))
            });
            if !same {
                row_reps.push(r);
            }
            row_of_rule.insert(id, row_reps.len() as u32);
        }

        let rows: Vec<u32> = order.iter().map(|id| row_of_rule[id]).collect();
        let weights: Vec<u64> = order.iter().map(|&id| occ_counts[id as usize]).collect();
        let layout = if options.root_layout { Layout::Root } else { Layout::Leaf };
        let grid = Grid::build(
            &rows,
            &order,
            &weights,
            &col_sizes,
            row_reps.len(),
            options.tau,
            options.epsilon,
            layout,
        )?;
        Self::assemble(grammar, grid, col_reps, row_reps)
    }

    /// Wires up the derived tables; shared by `build` and deserialization.
    pub fn assemble(grammar: Grammar, grid: Grid, col_reps: Vec<u32>, row_reps: Vec<u32>) -> Result<PatternIndex> {
        if col_reps.len() != grid.num_cols() || row_reps.len() != grid.num_rows() {
            return Err(Error::Corrupt("order representatives do not match the grid".into()));
        }
        let occ_counts = grammar.occurrence_counts();
        let mut uses: Vec<Vec<(u32, u64)>> = vec![Vec::new(); grammar.num_rules()];
        let mut byte_leaves = HashMap::new();
        for id in 0..grammar.num_rules() as u32 {
            match grammar.rule(id) {
                Rule::Node(b, c) => {
                    uses[*b as usize].push((id, 0));
                    uses[*c as usize].push((id, grammar.exp_len(*b)));
                }
                Rule::Leaf(s) => {
                    if s.len() == 1 {
                        byte_leaves.insert(s[0], id);
                    }
                }
            }
        }
        let mut start_docs: HashMap<u32, Vec<u32>> = HashMap::new();
        for d in 1..=grammar.num_docs() {
            start_docs.entry(grammar.start(d)).or_default().push(d);
        }
        let mut doc_starts = Vec::with_capacity(grammar.num_docs() as usize + 1);
        doc_starts.push(0);
        for d in 1..=grammar.num_docs() {
            doc_starts.push(doc_starts[d as usize - 1] + grammar.exp_len(grammar.start(d)));
        }
        Ok(PatternIndex {
            grammar,
            grid,
            col_reps,
            row_reps,
            occ_counts,
            uses,
            start_docs,
            byte_leaves,
            doc_starts,
        })
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn col_reps(&self) -> &[u32] {
        &self.col_reps
    }

    pub fn row_reps(&self) -> &[u32] {
        &self.row_reps
    }

    pub fn occ_count(&self, rule: u32) -> u64 {
        self.occ_counts[rule as usize]
    }

    /// Leaf rule of a single byte, when metasymbols are single bytes.
    pub fn byte_leaf(&self, b: u8) -> Option<u32> {
        self.byte_leaves.get(&b).copied()
    }

    pub fn num_docs(&self) -> u32 {
        self.grammar.num_docs()
    }

    pub fn doc_len(&self, d: u32) -> u64 {
        self.doc_starts[d as usize] - self.doc_starts[d as usize - 1]
    }

    pub fn total_len(&self) -> u64 {
        *self.doc_starts.last().unwrap()
    }

    /// Grid rectangle of the split P = P1 P2: root positions of the columns
    /// ending with P1 and rows starting with P2; None when either is empty.
    pub fn primary_rect(&self, p1: &[u8], p2: &[u8]) -> Option<(usize, usize, u32, u32)> {
        debug_assert!(!p1.is_empty() && !p2.is_empty());
        let rev1: Vec<u8> = p1.iter().rev().copied().collect();
        let g = &self.grammar;
        let c_lo = self
            .col_reps
            .partition_point(|&rep| trunc_cmp(g.suffix_rev_bytes(rep), &rev1) == Ordering::Less);
        let c_hi = self
            .col_reps
            .partition_point(|&rep| trunc_cmp(g.suffix_rev_bytes(rep), &rev1) != Ordering::Greater);
        let r_lo = self
            .row_reps
            .partition_point(|&rep| trunc_cmp(g.prefix_bytes(rep), p2) == Ordering::Less);
        let r_hi = self
            .row_reps
            .partition_point(|&rep| trunc_cmp(g.prefix_bytes(rep), p2) != Ordering::Greater);
        if c_lo == c_hi || r_lo == r_hi {
            return None;
        }
        let (x1, x2) = self.grid.map_columns(c_lo + 1, c_hi);
        if x1 > x2 {
            return None;
        }
        Some((x1, x2, r_lo as u32 + 1, r_hi as u32))
    }

    /// Number of occurrences of `pattern` across the collection.
    pub fn count(&self, pattern: &[u8], short: Option<&dyn ShortCounts>) -> Result<u64> {
        let m = pattern.len();
        if m == 0 {
            return Err(Error::Params("pattern must be nonempty".into()));
        }
        let ms = self.grammar.ms_len();
        if m == 1 && ms == 1 {
            return Ok(self.byte_leaf(pattern[0]).map_or(0, |t| self.occ_counts[t as usize]));
        }
        if m <= ms {
            return Ok(match short {
                Some(t) => t.total(pattern),
                None => self.locate(pattern)?.len() as u64,
            });
        }
        let mut total = 0;
        for k in 1..m {
            if let Some((x1, x2, y1, y2)) = self.primary_rect(&pattern[..k], &pattern[k..]) {
                total += self.grid.sum(x1, x2, y1, y2);
            }
        }
        Ok(total)
    }

    /// All occurrences, sorted by document then offset.
    pub fn locate(&self, pattern: &[u8]) -> Result<Vec<Occurrence>> {
        let m = pattern.len();
        if m == 0 {
            return Err(Error::Params("pattern must be nonempty".into()));
        }
        let mut out = Vec::new();
        if m >= 2 {
            for k in 1..m {
                if let Some((x1, x2, y1, y2)) = self.primary_rect(&pattern[..k], &pattern[k..]) {
                    for rule in self.grid.report(x1, x2, y1, y2) {
                        let left = left_of(&self.grammar, rule);
                        let offset = self.grammar.exp_len(left) - k as u64 + 1;
                        self.expand_occurrence(rule, offset, &mut out);
                    }
                }
            }
        }
        if m <= self.grammar.ms_len() {
            // Occurrences inside a single metasymbol.
            for id in 0..self.grammar.num_rules() as u32 {
                if let Rule::Leaf(s) = self.grammar.rule(id) {
                    if s.len() < m {
                        continue;
                    }
                    for q in 0..=s.len() - m {
                        if &s[q..q + m] == pattern {
                            self.expand_occurrence(id, q as u64 + 1, &mut out);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        debug_assert!(out.windows(2).all(|w| w[0] < w[1]), "duplicate occurrence");
        Ok(out)
    }

    /// Emits (document, offset) for every instance of `rule`, by climbing
    /// the uses table; output-sensitive in the number of instances.
    fn expand_occurrence(&self, rule: u32, offset: u64, out: &mut Vec<Occurrence>) {
        let mut stack = vec![(rule, offset)];
        while let Some((x, q)) = stack.pop() {
            if let Some(docs) = self.start_docs.get(&x) {
                for &d in docs {
                    out.push(Occurrence {
                        doc: d,
                        offset: q,
                        global: self.doc_starts[d as usize - 1] + q,
                    });
                }
            }
            for &(parent, off) in &self.uses[x as usize] {
                stack.push((parent, q + off));
            }
        }
    }

    /// Extracts `[from, to]` (1-based inclusive) of document `d`.
    pub fn extract(&self, d: u32, from: u64, to: u64) -> Result<Vec<u8>> {
        if d < 1 || d > self.grammar.num_docs() {
            return Err(Error::Params(format!("document {d} out of range")));
        }
        let len = self.doc_len(d);
        if from < 1 || from > to || to > len {
            return Err(Error::Params(format!(
                "range [{from}, {to}] outside document of length {len}"
            )));
        }
        Ok(self.grammar.extract(self.grammar.start(d), from, to))
    }
}

pub(crate) fn left_of(g: &Grammar, id: u32) -> u32 {
    match g.rule(id) {
        Rule::Node(b, _) => *b,
        Rule::Leaf(_) => unreachable!("leaf rules carry no cut"),
    }
}

pub(crate) fn right_of(g: &Grammar, id: u32) -> u32 {
    match g.rule(id) {
        Rule::Node(_, c) => *c,
        Rule::Leaf(_) => unreachable!("leaf rules carry no cut"),
    }
}
