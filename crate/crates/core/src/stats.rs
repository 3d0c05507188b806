//! Space and shape report for a built index.

use crate::grammar::Rule;
use crate::Index;

/// Machine-readable index statistics: collection shape, structure sizes in
/// bits, and the run counts that govern listing performance.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IndexStats {
    pub docs: u32,
    pub total_len: u64,
    /// Grammar rules after reachability pruning.
    pub rules: usize,
    pub leaves: usize,
    /// Sum of right-hand-side lengths in symbols.
    pub grammar_symbols: u64,
    /// Grid points (one per internal rule).
    pub points: usize,
    pub cols: usize,
    pub rows: usize,
    pub ms_len: usize,
    /// Runs of the per-node previous-occurrence tables, summed per wavelet
    /// tree level; level 0 is the root.
    pub rho_per_level: Vec<u64>,
    pub grammar_bits: u64,
    pub grid_bits: u64,
    /// List-boundary bitvectors over all nodes.
    pub marks_bits: u64,
    /// Run-length minimum headers over all nodes.
    pub rmq_bits: u64,
    /// Range-encoded document lists.
    pub lists_bits: u64,
    pub short_bits: u64,
    pub total_bits: u64,
}

impl IndexStats {
    pub fn gather(index: &Index) -> IndexStats {
        let g = index.pattern.grammar();
        let grid = index.pattern.grid();
        let doc = &index.doc;

        let grammar_bits: u64 = g
            .rules()
            .iter()
            .map(|r| match r {
                Rule::Leaf(s) => 8 + s.len() as u64 * 8,
                Rule::Node(..) => 64,
            })
            .sum::<u64>()
            + g.starts().len() as u64 * 32;

        let mut rho_per_level = Vec::new();
        let mut marks_bits: u64 = 0;
        let mut rmq_bits: u64 = 0;
        for (v, node) in doc.nodes.iter().enumerate() {
            marks_bits += node.marks.size_bits() as u64;
            let Some(heads) = &node.heads else { continue };
            rmq_bits += heads.size_bits() as u64;
            let level = grid.node_depth(v);
            if rho_per_level.len() <= level {
                rho_per_level.resize(level + 1, 0);
            }
            rho_per_level[level] += heads.runs() as u64;
        }

        let lists_bits: u64 = doc.rule_lists().iter().map(|l| l.size_bits() as u64).sum();
        let short_bits = doc.short_table().map_or(0, |t| t.size_bits() as u64);
        let grid_bits = grid.size_bits();

        IndexStats {
            docs: doc.num_docs(),
            total_len: index.pattern.total_len(),
            rules: g.num_rules(),
            leaves: g.num_leaves(),
            grammar_symbols: g.size_symbols(),
            points: grid.num_points(),
            cols: grid.num_cols(),
            rows: grid.num_rows(),
            ms_len: g.ms_len(),
            rho_per_level,
            grammar_bits,
            grid_bits,
            marks_bits,
            rmq_bits,
            lists_bits,
            short_bits,
            total_bits: grammar_bits + grid_bits + marks_bits + rmq_bits + lists_bits + short_bits,
        }
    }
}
