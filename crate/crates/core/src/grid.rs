//! Weighted two-dimensional grid of grammar points, stored as a wavelet
//! tree over the row sequence.
//!
//! Points arrive in column order; equal columns are grouped and marked in
//! `col_marks`, so column ranges map to contiguous root positions. Range
//! queries take root positions on the x axis and row values on the y axis.
//! A rectangle decomposes into at most `2 ceil(log2 rows)` wavelet node
//! intervals.
//!
//! Each point carries a label and a weight. `layout` picks where they live:
//! with the root layout a node position is resolved by tracking up to the
//! root (helped by sampled root pointers every `up_step` positions); with
//! the leaf layout it is resolved by tracking down to the point's leaf.
//! Weight sums over rectangles use per-node prefix sums sampled every
//! `sample_step` positions; the at most `sample_step - 1` boundary elements
//! per edge are resolved individually, so sums are exact for any setting.

use crate::error::{Error, Result};
use crate::succinct::BitVector;

const NONE: usize = usize::MAX;

struct WNode {
    lo: u32,
    hi: u32,
    len: usize,
    bits: Option<BitVector>,
    left: usize,
    right: usize,
    parent: usize,
    from_right: bool,
    /// Cumulative point weights at positions 0, step, 2*step, ...
    weight_samples: Vec<u64>,
    /// Root positions of every `up_step`-th element (root layout).
    up_samples: Vec<u32>,
    /// Point labels and weights in node order (leaf layout, leaves only).
    leaf_labels: Vec<u32>,
    leaf_weights: Vec<u64>,
}

/// Point placement policy; see the module docs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    Root,
    Leaf,
}

pub struct Grid {
    p: usize,
    r_cols: usize,
    r_rows: usize,
    col_marks: BitVector,
    nodes: Vec<WNode>,
    labels: Vec<u32>,
    weights: Vec<u64>,
    layout: Layout,
    sample_step: usize,
    up_step: usize,
    epsilon: f64,
    tau: usize,
}

/// A wavelet node interval produced by rectangle decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeRange {
    pub node: usize,
    pub lo: usize,
    pub hi: usize,
}

impl Grid {
    /// Builds the grid from points already sorted into root order. `rows`,
    /// `labels` and `weights` are per root position; `col_sizes` gives the
    /// number of consecutive points sharing each column. The flat argument
    /// list mirrors the container fields.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        rows: &[u32],
        labels: &[u32],
        weights: &[u64],
        col_sizes: &[u32],
        r_rows: usize,
        tau: usize,
        epsilon: f64,
        layout: Layout,
    ) -> Result<Grid> {
        let p = rows.len();
        if labels.len() != p || weights.len() != p {
            return Err(Error::Build("label and weight arrays must match the points".into()));
        }
        if col_sizes.iter().map(|&c| c as usize).sum::<usize>() != p {
            return Err(Error::Build("column sizes do not cover the points".into()));
        }
        if col_sizes.contains(&0) {
            return Err(Error::Build("empty grid column".into()));
        }
        if rows.iter().any(|&v| v < 1 || v as usize > r_rows) {
            return Err(Error::Build("point row outside the grid".into()));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::Params("epsilon must lie in (0, 1]".into()));
        }
        let sample_step = if tau == 0 {
            (usize::BITS - p.max(2).leading_zeros()) as usize
        } else {
            tau
        };
        let up_step = ((p.max(1) as f64).powf(epsilon).ceil() as usize).max(1);

        // Column starts, plus a closing sentinel at p + 1.
        let mut marks = Vec::with_capacity(p + 1);
        for &c in col_sizes {
            marks.push(true);
            marks.extend(std::iter::repeat_n(false, c as usize - 1));
        }
        marks.push(true);
        let col_marks = BitVector::from_bits(&marks);

        let mut grid = Grid {
            p,
            r_cols: col_sizes.len(),
            r_rows,
            col_marks,
            nodes: Vec::new(),
            labels: if layout == Layout::Root { labels.to_vec() } else { Vec::new() },
            weights: if layout == Layout::Root { weights.to_vec() } else { Vec::new() },
            layout,
            sample_step,
            up_step,
            epsilon,
            tau,
        };
        if r_rows > 0 {
            let entries: Vec<(u32, usize)> = rows.iter().copied().zip(1..=p).collect();
            grid.build_node(1, r_rows as u32, entries, NONE, false, labels, weights);
        }
        Ok(grid)
    }

    #[allow(clippy::too_many_arguments)]
    fn build_node(
        &mut self,
        lo: u32,
        hi: u32,
        entries: Vec<(u32, usize)>,
        parent: usize,
        from_right: bool,
        labels: &[u32],
        weights: &[u64],
    ) -> usize {
        let id = self.nodes.len();
        let len = entries.len();
        let mut samples = Vec::with_capacity(len / self.sample_step + 1);
        let mut up_samples = Vec::with_capacity(len / self.up_step);
        let mut cum = 0u64;
        samples.push(0);
        for (i, &(_, root_pos)) in entries.iter().enumerate() {
            cum += weights[root_pos - 1];
            if (i + 1) % self.sample_step == 0 {
                samples.push(cum);
            }
            if self.layout == Layout::Root && (i + 1) % self.up_step == 0 {
                up_samples.push(root_pos as u32);
            }
        }
        let leaf = lo == hi;
        let (leaf_labels, leaf_weights) = if leaf && self.layout == Layout::Leaf {
            (
                entries.iter().map(|&(_, rp)| labels[rp - 1]).collect(),
                entries.iter().map(|&(_, rp)| weights[rp - 1]).collect(),
            )
        } else {
            (Vec::new(), Vec::new())
        };
        let bits = if leaf {
            None
        } else {
            let mid = (lo + hi).div_ceil(2);
            Some(BitVector::from_bits(
                &entries.iter().map(|&(r, _)| r >= mid).collect::<Vec<_>>(),
            ))
        };
        self.nodes.push(WNode {
            lo,
            hi,
            len,
            bits,
            left: NONE,
            right: NONE,
            parent,
            from_right,
            weight_samples: samples,
            up_samples,
            leaf_labels,
            leaf_weights,
        });
        if !leaf {
            let mid = (lo + hi).div_ceil(2);
            let (mut lv, mut rv) = (Vec::new(), Vec::new());
            for &(r, rp) in &entries {
                if r >= mid {
                    rv.push((r, rp));
                } else {
                    lv.push((r, rp));
                }
            }
            drop(entries);
            let l = self.build_node(lo, mid - 1, lv, id, false, labels, weights);
            let r = self.build_node(mid, hi, rv, id, true, labels, weights);
            self.nodes[id].left = l;
            self.nodes[id].right = r;
        }
        id
    }

    pub fn num_points(&self) -> usize {
        self.p
    }

    pub fn num_cols(&self) -> usize {
        self.r_cols
    }

    pub fn num_rows(&self) -> usize {
        self.r_rows
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn sample_step(&self) -> usize {
        self.sample_step
    }

    pub fn up_step(&self) -> usize {
        self.up_step
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn col_marks(&self) -> &BitVector {
        &self.col_marks
    }

    pub fn node_symbols(&self, v: usize) -> (u32, u32) {
        (self.nodes[v].lo, self.nodes[v].hi)
    }

    /// Depth of node `v`; the root is 0.
    pub fn node_depth(&self, v: usize) -> usize {
        let mut d = 0;
        let mut v = v;
        while self.nodes[v].parent != NONE {
            v = self.nodes[v].parent;
            d += 1;
        }
        d
    }

    pub fn node_len(&self, v: usize) -> usize {
        self.nodes[v].len
    }

    pub fn is_leaf_node(&self, v: usize) -> bool {
        self.nodes[v].bits.is_none()
    }

    /// Root positions `[lo, hi]` covered by columns `[c1, c2]`; empty column
    /// ranges yield `lo > hi`.
    pub fn map_columns(&self, c1: usize, c2: usize) -> (usize, usize) {
        if c1 > c2 || c2 > self.r_cols {
            return (1, 0);
        }
        let lo = self.col_marks.select1(c1).expect("column in range");
        let hi = self.col_marks.select1(c2 + 1).expect("sentinel") - 1;
        (lo, hi)
    }

    /// Column of a root position.
    pub fn col_of(&self, root_pos: usize) -> usize {
        self.col_marks.rank1(root_pos)
    }

    /// Row of a root position, by wavelet descent.
    pub fn row_of(&self, root_pos: usize) -> u32 {
        let mut v = 0;
        let mut pos = root_pos;
        loop {
            let node = &self.nodes[v];
            match &node.bits {
                None => return node.lo,
                Some(b) => {
                    if b.get(pos) {
                        pos = b.rank1(pos);
                        v = node.right;
                    } else {
                        pos = b.rank0(pos);
                        v = node.left;
                    }
                }
            }
        }
    }

    /// Canonical cover of the rectangle: at most `2 ceil(log2 rows)` node
    /// intervals. `x1, x2` are root positions.
    pub fn decompose(&self, x1: usize, x2: usize, y1: u32, y2: u32) -> Vec<NodeRange> {
        let mut out = Vec::new();
        if self.p == 0 || x1 > x2 || y1 > y2 {
            return out;
        }
        assert!(x1 >= 1 && x2 <= self.p, "x range outside the grid");
        self.decompose_into(0, x1, x2, y1, y2, &mut out);
        out
    }

    fn decompose_into(&self, v: usize, i: usize, j: usize, y1: u32, y2: u32, out: &mut Vec<NodeRange>) {
        if i > j {
            return;
        }
        let node = &self.nodes[v];
        if node.hi < y1 || node.lo > y2 {
            return;
        }
        if y1 <= node.lo && node.hi <= y2 {
            out.push(NodeRange { node: v, lo: i, hi: j });
            return;
        }
        let b = node.bits.as_ref().expect("partial overlap only at internal nodes");
        let (li, lj) = (b.rank0(i - 1) + 1, b.rank0(j));
        let (ri, rj) = (b.rank1(i - 1) + 1, b.rank1(j));
        self.decompose_into(node.left, li, lj, y1, y2, out);
        self.decompose_into(node.right, ri, rj, y1, y2, out);
    }

    /// Number of points in the rectangle.
    pub fn count(&self, x1: usize, x2: usize, y1: u32, y2: u32) -> u64 {
        self.decompose(x1, x2, y1, y2)
            .iter()
            .map(|r| (r.hi - r.lo + 1) as u64)
            .sum()
    }

    /// Labels of the points in the rectangle, in decomposition order.
    pub fn report(&self, x1: usize, x2: usize, y1: u32, y2: u32) -> Vec<u32> {
        let mut out = Vec::new();
        for r in self.decompose(x1, x2, y1, y2) {
            for pos in r.lo..=r.hi {
                out.push(self.point_at(r.node, pos).0);
            }
        }
        out
    }

    /// Total weight of the points in the rectangle; exact for every
    /// sampling setting.
    pub fn sum(&self, x1: usize, x2: usize, y1: u32, y2: u32) -> u64 {
        self.decompose(x1, x2, y1, y2)
            .iter()
            .map(|r| self.prefix_weight(r.node, r.hi) - self.prefix_weight(r.node, r.lo - 1))
            .sum()
    }

    /// Sum of the first `k` weights in node `v`.
    fn prefix_weight(&self, v: usize, k: usize) -> u64 {
        let t = k / self.sample_step;
        let mut s = self.nodes[v].weight_samples[t];
        for pos in t * self.sample_step + 1..=k {
            s += self.point_at(v, pos).1;
        }
        s
    }

    /// Label and weight of position `pos` of node `v`, resolved per layout.
    pub fn point_at(&self, v: usize, pos: usize) -> (u32, u64) {
        match self.layout {
            Layout::Root => {
                let rp = self.track_up(v, pos).0;
                (self.labels[rp - 1], self.weights[rp - 1])
            }
            Layout::Leaf => {
                let (leaf, q) = self.leaf_of(v, pos);
                let node = &self.nodes[leaf];
                (node.leaf_labels[q - 1], node.leaf_weights[q - 1])
            }
        }
    }

    /// Maps `(v, pos)` to the root position, returning the number of parent
    /// steps taken. Sampled root pointers short-circuit the walk.
    pub fn track_up(&self, mut v: usize, mut pos: usize) -> (usize, usize) {
        let mut steps = 0;
        loop {
            if self.layout == Layout::Root && pos.is_multiple_of(self.up_step) {
                let node = &self.nodes[v];
                if let Some(&rp) = node.up_samples.get(pos / self.up_step - 1) {
                    return (rp as usize, steps);
                }
            }
            let node = &self.nodes[v];
            if node.parent == NONE {
                return (pos, steps);
            }
            let parent = &self.nodes[node.parent];
            let b = parent.bits.as_ref().expect("parent is internal");
            pos = if node.from_right {
                b.select1(pos).expect("child position exists in parent")
            } else {
                b.select0(pos).expect("child position exists in parent")
            };
            v = node.parent;
            steps += 1;
        }
    }

    /// Maps `(v, pos)` down to the leaf holding that point.
    pub fn leaf_of(&self, mut v: usize, mut pos: usize) -> (usize, usize) {
        loop {
            let node = &self.nodes[v];
            match &node.bits {
                None => return (v, pos),
                Some(b) => {
                    if b.get(pos) {
                        pos = b.rank1(pos);
                        v = node.right;
                    } else {
                        pos = b.rank0(pos);
                        v = node.left;
                    }
                }
            }
        }
    }

    /// Label sequences per wavelet node, for building per-node document
    /// structures. Transient: O(p log rows) space.
    pub(crate) fn node_label_sequences(&self) -> Vec<Vec<u32>> {
        let mut seqs: Vec<Vec<u32>> = (0..self.nodes.len())
            .map(|v| Vec::with_capacity(self.nodes[v].len))
            .collect();
        if self.p == 0 {
            return seqs;
        }
        for root_pos in 1..=self.p {
            let label = self.point_label_from_root(root_pos);
            let mut v = 0;
            let mut pos = root_pos;
            loop {
                seqs[v].push(label);
                let node = &self.nodes[v];
                match &node.bits {
                    None => break,
                    Some(b) => {
                        if b.get(pos) {
                            pos = b.rank1(pos);
                            v = node.right;
                        } else {
                            pos = b.rank0(pos);
                            v = node.left;
                        }
                    }
                }
            }
        }
        seqs
    }

    fn point_label_from_root(&self, root_pos: usize) -> u32 {
        match self.layout {
            Layout::Root => self.labels[root_pos - 1],
            Layout::Leaf => {
                let (leaf, q) = self.leaf_of(0, root_pos);
                self.nodes[leaf].leaf_labels[q - 1]
            }
        }
    }

    /// Approximate size in bits of all stored components.
    pub fn size_bits(&self) -> u64 {
        let mut bits = self.col_marks.size_bits() as u64;
        for n in &self.nodes {
            if let Some(b) = &n.bits {
                bits += b.size_bits() as u64;
            }
            bits += (n.weight_samples.len() as u64) * 64;
            bits += (n.up_samples.len() as u64) * 32;
            bits += (n.leaf_labels.len() as u64) * 32;
            bits += (n.leaf_weights.len() as u64) * 64;
        }
        bits += (self.labels.len() as u64) * 32;
        bits += (self.weights.len() as u64) * 64;
        bits
    }

    /// Raw per-point data in root order, for serialization.
    pub(crate) fn export_points(&self) -> (Vec<u32>, Vec<u32>, Vec<u64>, Vec<u32>) {
        let rows: Vec<u32> = (1..=self.p).map(|rp| self.row_of(rp)).collect();
        let labels: Vec<u32> = (1..=self.p).map(|rp| self.point_label_from_root(rp)).collect();
        let weights: Vec<u64> = (1..=self.p)
            .map(|rp| match self.layout {
                Layout::Root => self.weights[rp - 1],
                Layout::Leaf => {
                    let (leaf, q) = self.leaf_of(0, rp);
                    self.nodes[leaf].leaf_weights[q - 1]
                }
            })
            .collect();
        let mut col_sizes = Vec::with_capacity(self.r_cols);
        for c in 1..=self.r_cols {
            let (lo, hi) = self.map_columns(c, c);
            col_sizes.push((hi - lo + 1) as u32);
        }
        (rows, labels, weights, col_sizes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Frozen worked example: 13 points over 11 columns and 7 rows.
    fn example_grid(tau: usize, epsilon: f64, layout: Layout) -> Grid {
        let rows = [2, 4, 4, 5, 3, 5, 7, 6, 1, 1, 1, 1, 1];
        let labels: Vec<u32> = (1..=13).collect();
        let weights = [3, 1, 2, 1, 1, 1, 2, 1, 1, 3, 2, 1, 2];
        let col_sizes = [1, 1, 1, 1, 2, 2, 1, 1, 1, 1, 1];
        Grid::build(&rows, &labels, &weights, &col_sizes, 7, tau, epsilon, layout).unwrap()
    }

    #[test]
    fn column_marks_match_example() {
        let g = example_grid(0, 0.5, Layout::Root);
        let bits: String = (1..=14).map(|i| if g.col_marks().get(i) { '1' } else { '0' }).collect();
        assert_eq!(bits, "11111010111111");
        assert_eq!(g.map_columns(6, 6), (7, 8));
        assert_eq!(g.map_columns(1, 11), (1, 13));
        assert_eq!(g.col_of(8), 6);
    }

    #[test]
    fn rows_match_example_sequence() {
        let g = example_grid(0, 0.5, Layout::Root);
        let s: Vec<u32> = (1..=13).map(|i| g.row_of(i)).collect();
        assert_eq!(s, vec![2, 4, 4, 5, 3, 5, 7, 6, 1, 1, 1, 1, 1]);
        assert_eq!(&s[2..6], &[4, 5, 3, 5]);
    }

    #[test]
    fn example_rectangle_decomposition() {
        let g = example_grid(0, 0.5, Layout::Root);
        assert_eq!(g.count(3, 6, 2, 6), 4);
        let ranges = g.decompose(3, 6, 2, 6);
        assert_eq!(ranges.len(), 2);
        let spans: Vec<((u32, u32), usize, usize)> = ranges
            .iter()
            .map(|r| (g.node_symbols(r.node), r.lo, r.hi))
            .collect();
        assert!(spans.contains(&((2, 3), 2, 2)));
        assert!(spans.contains(&((4, 5), 2, 4)));
    }

    #[test]
    fn example_primary_rectangle() {
        // Columns of "ba" map to root positions [7, 8]; row 7 holds the one
        // nonterminal whose children cut the pattern, with weight 2.
        for layout in [Layout::Root, Layout::Leaf] {
            let g = example_grid(0, 0.5, layout);
            let (x1, x2) = g.map_columns(6, 6);
            assert_eq!(g.sum(x1, x2, 7, 7), 2);
            assert_eq!(g.report(x1, x2, 7, 7), vec![7]);
        }
    }

    fn brute(points: &[(usize, u32, u32, u64)], x1: usize, x2: usize, y1: u32, y2: u32) -> (u64, u64, Vec<u32>) {
        let mut count = 0;
        let mut sum = 0;
        let mut labels = Vec::new();
        for &(x, y, label, w) in points {
            if x1 <= x && x <= x2 && y1 <= y && y <= y2 {
                count += 1;
                sum += w;
                labels.push(label);
            }
        }
        labels.sort_unstable();
        (count, sum, labels)
    }

    #[test]
    fn queries_match_brute_force() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for &(tau, eps) in &[(0usize, 0.5f64), (1, 1.0), (3, 0.25), (7, 0.6)] {
            for layout in [Layout::Root, Layout::Leaf] {
                let p = rng.gen_range(1..60usize);
                let r_rows = rng.gen_range(1..12usize);
                let rows: Vec<u32> = (0..p).map(|_| rng.gen_range(1..=r_rows as u32)).collect();
                let labels: Vec<u32> = (1..=p as u32).collect();
                let weights: Vec<u64> = (0..p).map(|_| rng.gen_range(0..9u64)).collect();
                // Random column grouping.
                let mut col_sizes = Vec::new();
                let mut rem = p;
                while rem > 0 {
                    let c = rng.gen_range(1..=rem.min(4));
                    col_sizes.push(c as u32);
                    rem -= c;
                }
                let g = Grid::build(&rows, &labels, &weights, &col_sizes, r_rows, tau, eps, layout).unwrap();
                let points: Vec<(usize, u32, u32, u64)> =
                    (0..p).map(|i| (i + 1, rows[i], labels[i], weights[i])).collect();
                for _ in 0..40 {
                    let mut xs = [rng.gen_range(1..=p), rng.gen_range(1..=p)];
                    xs.sort_unstable();
                    let mut ys = [rng.gen_range(1..=r_rows as u32), rng.gen_range(1..=r_rows as u32)];
                    ys.sort_unstable();
                    let (bc, bs, bl) = brute(&points, xs[0], xs[1], ys[0], ys[1]);
                    assert_eq!(g.count(xs[0], xs[1], ys[0], ys[1]), bc);
                    assert_eq!(g.sum(xs[0], xs[1], ys[0], ys[1]), bs);
                    let mut rl = g.report(xs[0], xs[1], ys[0], ys[1]);
                    rl.sort_unstable();
                    assert_eq!(rl, bl);
                    let bound = 2 * (usize::BITS - (r_rows.max(2) - 1).leading_zeros()) as usize;
                    assert!(g.decompose(xs[0], xs[1], ys[0], ys[1]).len() <= bound.max(1));
                }
            }
        }
    }

    #[test]
    fn track_up_is_bounded_and_consistent() {
        let g = example_grid(0, 0.5, Layout::Root);
        let budget = (1.0 / 0.5) * (13f64).powf(0.5) + 4.0;
        for rp in 1..=13usize {
            let (leaf, q) = g.leaf_of(0, rp);
            let (back, steps) = g.track_up(leaf, q);
            assert_eq!(back, rp);
            assert!((steps as f64) <= budget);
        }
    }

    #[test]
    fn empty_grid_answers_empty() {
        let g = Grid::build(&[], &[], &[], &[], 0, 0, 0.5, Layout::Root).unwrap();
        assert_eq!(g.count(1, 0, 1, 0), 0);
        assert_eq!(g.map_columns(1, 0), (1, 0));
        assert!(g.report(1, 0, 1, 0).is_empty());
    }

    #[test]
    fn export_points_roundtrip() {
        for layout in [Layout::Root, Layout::Leaf] {
            let g = example_grid(2, 0.5, layout);
            let (rows, labels, weights, col_sizes) = g.export_points();
            assert_eq!(rows, vec![2, 4, 4, 5, 3, 5, 7, 6, 1, 1, 1, 1, 1]);
            assert_eq!(labels, (1..=13).collect::<Vec<u32>>());
            assert_eq!(weights, vec![3, 1, 2, 1, 1, 1, 2, 1, 1, 3, 2, 1, 2]);
            assert_eq!(col_sizes, vec![1, 1, 1, 1, 2, 2, 1, 1, 1, 1, 1]);
        }
    }

    #[test]
    fn rejects_bad_build_input() {
        assert!(Grid::build(&[1, 8], &[1, 2], &[1, 1], &[2], 7, 0, 0.5, Layout::Root).is_err());
        assert!(Grid::build(&[1, 2], &[1, 2], &[1, 1], &[3], 7, 0, 0.5, Layout::Root).is_err());
        assert!(Grid::build(&[1], &[1], &[1], &[1], 1, 0, 1.5, Layout::Root).is_err());
    }
}
