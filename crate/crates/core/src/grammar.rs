//! Straight-line grammars over document collections.
//!
//! Every rule is a leaf (a metasymbol of at most `ms_len` bytes) or a binary
//! node. Rule ids are topological: children always precede parents. Each
//! document has a start rule; identical subtrees are shared through hash
//! consing, so repetitive collections parse into few distinct rules.
//!
//! `from_script` builds the parse trees persistently: each document's tree
//! is the previous one with path-copied edits. Substitutions and deletions
//! keep the tree shape; insertions rebalance along the edited path so tree
//! heights stay logarithmic in document length.

use crate::collection::{EditScript, PrimOp};
use crate::error::{Error, Result};
use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// Terminal metasymbol; deletions may shrink it below `ms_len`, possibly
    /// to empty.
    Leaf(Vec<u8>),
    /// Binary nonterminal expanding to the left child then the right child.
    Node(u32, u32),
}

pub struct Grammar {
    rules: Vec<Rule>,
    starts: Vec<u32>,
    exp_lens: Vec<u64>,
    ms_len: usize,
}

struct Builder {
    rules: Vec<Rule>,
    exp_lens: Vec<u64>,
    heights: Vec<u32>,
    leaf_map: HashMap<Vec<u8>, u32>,
    node_map: HashMap<(u32, u32), u32>,
    ms_len: usize,
}

impl Builder {
    fn new(ms_len: usize) -> Builder {
        Builder {
            rules: Vec::new(),
            exp_lens: Vec::new(),
            heights: Vec::new(),
            leaf_map: HashMap::new(),
            node_map: HashMap::new(),
            ms_len,
        }
    }

    fn leaf(&mut self, bytes: &[u8]) -> u32 {
        debug_assert!(bytes.len() <= self.ms_len);
        if let Some(&id) = self.leaf_map.get(bytes) {
            return id;
        }
        let id = self.rules.len() as u32;
        self.rules.push(Rule::Leaf(bytes.to_vec()));
        self.exp_lens.push(bytes.len() as u64);
        self.heights.push(1);
        self.leaf_map.insert(bytes.to_vec(), id);
        id
    }

    fn node(&mut self, b: u32, c: u32) -> u32 {
        if let Some(&id) = self.node_map.get(&(b, c)) {
            return id;
        }
        let id = self.rules.len() as u32;
        self.rules.push(Rule::Node(b, c));
        self.exp_lens.push(self.exp_lens[b as usize] + self.exp_lens[c as usize]);
        self.heights
            .push(1 + self.heights[b as usize].max(self.heights[c as usize]));
        self.node_map.insert((b, c), id);
        id
    }

    fn children(&self, id: u32) -> (u32, u32) {
        match self.rules[id as usize] {
            Rule::Node(b, c) => (b, c),
            Rule::Leaf(_) => unreachable!("leaf has no children"),
        }
    }

    fn h(&self, id: u32) -> u32 {
        self.heights[id as usize]
    }

    fn len(&self, id: u32) -> u64 {
        self.exp_lens[id as usize]
    }

    /// Height-balanced tree over a byte string split into metasymbols.
    fn build_balanced(&mut self, text: &[u8]) -> u32 {
        if text.len() <= self.ms_len {
            return self.leaf(text);
        }
        let chunks = text.len().div_ceil(self.ms_len);
        let mid = (chunks.div_ceil(2)) * self.ms_len;
        let left = self.build_balanced(&text[..mid]);
        let right = self.build_balanced(&text[mid..]);
        self.node(left, right)
    }

    /// Joins two subtrees whose heights differ by at most two, restoring the
    /// height invariant with a single or double rotation.
    fn rebalance(&mut self, b: u32, c: u32) -> u32 {
        if self.h(b) >= self.h(c) + 2 {
            let (b1, b2) = self.children(b);
            if self.h(b1) >= self.h(b2) {
                let r = self.node(b2, c);
                self.node(b1, r)
            } else {
                let (b21, b22) = self.children(b2);
                let l = self.node(b1, b21);
                let r = self.node(b22, c);
                self.node(l, r)
            }
        } else if self.h(c) >= self.h(b) + 2 {
            let (c1, c2) = self.children(c);
            if self.h(c2) >= self.h(c1) {
                let l = self.node(b, c1);
                self.node(l, c2)
            } else {
                let (c11, c12) = self.children(c1);
                let l = self.node(b, c11);
                let r = self.node(c12, c2);
                self.node(l, r)
            }
        } else {
            self.node(b, c)
        }
    }

    /// Inserts `sym` so it lands at position `pos` of the expansion,
    /// 1 <= pos <= len + 1. Overfull leaves split in half.
    fn insert(&mut self, id: u32, pos: u64, sym: u8) -> u32 {
        match self.rules[id as usize].clone() {
            Rule::Leaf(mut s) => {
                s.insert(pos as usize - 1, sym);
                if s.len() <= self.ms_len {
                    self.leaf(&s)
                } else {
                    let mid = s.len().div_ceil(2);
                    let l = self.leaf(&s[..mid]);
                    let r = self.leaf(&s[mid..]);
                    self.node(l, r)
                }
            }
            Rule::Node(b, c) => {
                if pos <= self.len(b) {
                    let nb = self.insert(b, pos, sym);
                    self.rebalance(nb, c)
                } else {
                    let nc = self.insert(c, pos - self.len(b), sym);
                    self.rebalance(b, nc)
                }
            }
        }
    }

    fn delete(&mut self, id: u32, pos: u64) -> u32 {
        match self.rules[id as usize].clone() {
            Rule::Leaf(mut s) => {
                s.remove(pos as usize - 1);
                self.leaf(&s)
            }
            Rule::Node(b, c) => {
                if pos <= self.len(b) {
                    let nb = self.delete(b, pos);
                    self.node(nb, c)
                } else {
                    let nc = self.delete(c, pos - self.len(b));
                    self.node(b, nc)
                }
            }
        }
    }

    fn substitute(&mut self, id: u32, pos: u64, sym: u8) -> u32 {
        match self.rules[id as usize].clone() {
            Rule::Leaf(mut s) => {
                s[pos as usize - 1] = sym;
                self.leaf(&s)
            }
            Rule::Node(b, c) => {
                if pos <= self.len(b) {
                    let nb = self.substitute(b, pos, sym);
                    self.node(nb, c)
                } else {
                    let nc = self.substitute(c, pos - self.len(b), sym);
                    self.node(b, nc)
                }
            }
        }
    }

    /// Drops rules unreachable from any start; edits orphan intermediate
    /// versions, and unreachable rules would otherwise surface as grid rows
    /// with no occurrences. Ids stay topological because the kept subset
    /// preserves relative order.
    fn finish(self, starts: Vec<u32>) -> Grammar {
        let n = self.rules.len();
        let mut keep = vec![false; n];
        let mut stack: Vec<u32> = starts.clone();
        while let Some(id) = stack.pop() {
            if keep[id as usize] {
                continue;
            }
            keep[id as usize] = true;
            if let Rule::Node(b, c) = self.rules[id as usize] {
                stack.push(b);
                stack.push(c);
            }
        }
        let mut remap = vec![u32::MAX; n];
        let mut rules = Vec::new();
        let mut exp_lens = Vec::new();
        for (old, rule) in self.rules.into_iter().enumerate() {
            if !keep[old] {
                continue;
            }
            remap[old] = rules.len() as u32;
            exp_lens.push(self.exp_lens[old]);
            rules.push(match rule {
                Rule::Leaf(s) => Rule::Leaf(s),
                Rule::Node(b, c) => Rule::Node(remap[b as usize], remap[c as usize]),
            });
        }
        Grammar {
            rules,
            starts: starts.into_iter().map(|s| remap[s as usize]).collect(),
            exp_lens,
            ms_len: self.ms_len,
        }
    }
}

impl Grammar {
    /// Parses each document independently with height-balanced trees;
    /// hash consing shares identical subtrees across documents.
    pub fn from_documents(docs: &[Vec<u8>], ms_len: usize) -> Result<Grammar> {
        if ms_len == 0 {
            return Err(Error::Params("metasymbol length must be positive".into()));
        }
        if docs.is_empty() {
            return Err(Error::Params("collection must hold at least one document".into()));
        }
        let mut b = Builder::new(ms_len);
        let starts = docs.iter().map(|d| b.build_balanced(d)).collect();
        Ok(b.finish(starts))
    }

    /// Builds the parse trees by replaying the script's normalized
    /// operations over a persistent tree of the base document.
    pub fn from_script(base: &[u8], script: &EditScript, ms_len: usize) -> Result<Grammar> {
        if ms_len == 0 {
            return Err(Error::Params("metasymbol length must be positive".into()));
        }
        let norm = script.normalize(base)?;
        let mut b = Builder::new(ms_len);
        let mut root = b.build_balanced(base);
        let mut starts = Vec::with_capacity(norm.per_doc.len());
        for ops in &norm.per_doc {
            for &op in ops {
                root = match op {
                    PrimOp::Insert(p, s) => b.insert(root, p, s),
                    PrimOp::Delete(p) => b.delete(root, p),
                    PrimOp::Substitute(p, s) => b.substitute(root, p, s),
                };
            }
            starts.push(root);
        }
        Ok(b.finish(starts))
    }

    /// Revalidates rules loaded from external data.
    pub fn assemble(rules: Vec<Rule>, starts: Vec<u32>, ms_len: usize) -> Result<Grammar> {
        if ms_len == 0 {
            return Err(Error::Corrupt("metasymbol length must be positive".into()));
        }
        let n = rules.len() as u32;
        let mut exp_lens = Vec::with_capacity(rules.len());
        for (id, rule) in rules.iter().enumerate() {
            match rule {
                Rule::Leaf(s) => {
                    if s.len() > ms_len {
                        return Err(Error::Corrupt(format!("leaf {id} exceeds metasymbol length")));
                    }
                    exp_lens.push(s.len() as u64);
                }
                Rule::Node(b, c) => {
                    if *b as usize >= id || *c as usize >= id {
                        return Err(Error::Corrupt(format!("rule {id} references a later rule")));
                    }
                    exp_lens.push(exp_lens[*b as usize] + exp_lens[*c as usize]);
                }
            }
        }
        if starts.is_empty() {
            return Err(Error::Corrupt("grammar has no start rules".into()));
        }
        if starts.iter().any(|&s| s >= n) {
            return Err(Error::Corrupt("start rule out of range".into()));
        }
        Ok(Grammar {
            rules,
            starts,
            exp_lens,
            ms_len,
        })
    }

    pub fn ms_len(&self) -> usize {
        self.ms_len
    }

    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn num_docs(&self) -> u32 {
        self.starts.len() as u32
    }

    pub fn rule(&self, id: u32) -> &Rule {
        &self.rules[id as usize]
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn starts(&self) -> &[u32] {
        &self.starts
    }

    /// Start rule of document `d` (1-based).
    pub fn start(&self, d: u32) -> u32 {
        self.starts[d as usize - 1]
    }

    pub fn exp_len(&self, id: u32) -> u64 {
        self.exp_lens[id as usize]
    }

    pub fn is_leaf(&self, id: u32) -> bool {
        matches!(self.rules[id as usize], Rule::Leaf(_))
    }

    pub fn num_nodes(&self) -> usize {
        self.rules.iter().filter(|r| matches!(r, Rule::Node(..))).count()
    }

    pub fn num_leaves(&self) -> usize {
        self.rules.len() - self.num_nodes()
    }

    /// Total grammar size: bytes in leaves plus two symbols per node.
    pub fn size_symbols(&self) -> u64 {
        self.rules
            .iter()
            .map(|r| match r {
                Rule::Leaf(s) => s.len() as u64,
                Rule::Node(..) => 2,
            })
            .sum()
    }

    pub fn expand(&self, id: u32) -> Vec<u8> {
        self.prefix_bytes(id).collect()
    }

    /// Expansion slice `[from, to]`, 1-based inclusive; panics out of range.
    pub fn extract(&self, id: u32, from: u64, to: u64) -> Vec<u8> {
        assert!(1 <= from && from <= to && to <= self.exp_len(id), "extract range out of bounds");
        let mut out = Vec::with_capacity((to - from + 1) as usize);
        self.extract_into(id, from, to, &mut out);
        out
    }

    fn extract_into(&self, id: u32, from: u64, to: u64, out: &mut Vec<u8>) {
        let mut id = id;
        let (mut from, mut to) = (from, to);
        loop {
            match &self.rules[id as usize] {
                Rule::Leaf(s) => {
                    out.extend_from_slice(&s[from as usize - 1..to as usize]);
                    return;
                }
                Rule::Node(b, c) => {
                    let lb = self.exp_len(*b);
                    if to <= lb {
                        id = *b;
                    } else if from > lb {
                        id = *c;
                        from -= lb;
                        to -= lb;
                    } else {
                        self.extract_into(*b, from, lb, out);
                        id = *c;
                        to -= lb;
                        from = 1;
                    }
                }
            }
        }
    }

    /// Expansion bytes left to right, lazily.
    pub fn prefix_bytes(&self, id: u32) -> PrefixIter<'_> {
        PrefixIter {
            g: self,
            stack: vec![id],
            leaf: &[],
            pos: 0,
        }
    }

    /// Expansion bytes right to left, lazily.
    pub fn suffix_rev_bytes(&self, id: u32) -> SuffixRevIter<'_> {
        SuffixRevIter {
            g: self,
            stack: vec![id],
            leaf: &[],
            rem: 0,
        }
    }

    /// Occurrences of each rule across all parse trees: starts count once,
    /// and every occurrence of a node propagates to both children.
    pub fn occurrence_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.rules.len()];
        for &s in &self.starts {
            counts[s as usize] += 1;
        }
        for id in (0..self.rules.len()).rev() {
            if let Rule::Node(b, c) = self.rules[id] {
                let k = counts[id];
                counts[b as usize] += k;
                counts[c as usize] += k;
            }
        }
        counts
    }

    /// Checks every document expands back to its source bytes.
    pub fn verify_expansions(&self, docs: &[Vec<u8>]) -> Result<()> {
        if docs.len() != self.starts.len() {
            return Err(Error::Build(format!(
                "grammar covers {} documents, collection has {}",
                self.starts.len(),
                docs.len()
            )));
        }
        for (i, doc) in docs.iter().enumerate() {
            let start = self.starts[i];
            if self.exp_len(start) != doc.len() as u64
                || !self.prefix_bytes(start).eq(doc.iter().copied())
            {
                return Err(Error::Build(format!("document {} does not match its expansion", i + 1)));
            }
        }
        Ok(())
    }
}

pub struct PrefixIter<'g> {
    g: &'g Grammar,
    stack: Vec<u32>,
    leaf: &'g [u8],
    pos: usize,
}

impl<'g> Iterator for PrefixIter<'g> {
    type Item = u8;
    fn next(&mut self) -> Option<u8> {
        loop {
            if self.pos < self.leaf.len() {
                self.pos += 1;
                return Some(self.leaf[self.pos - 1]);
            }
            let id = self.stack.pop()?;
            match &self.g.rules[id as usize] {
                Rule::Leaf(s) => {
                    self.leaf = s;
                    self.pos = 0;
                }
                Rule::Node(b, c) => {
                    self.stack.push(*c);
                    self.stack.push(*b);
                }
            }
        }
    }
}

pub struct SuffixRevIter<'g> {
    g: &'g Grammar,
    stack: Vec<u32>,
    leaf: &'g [u8],
    rem: usize,
}

impl<'g> Iterator for SuffixRevIter<'g> {
    type Item = u8;
    fn next(&mut self) -> Option<u8> {
        loop {
            if self.rem > 0 {
                self.rem -= 1;
                return Some(self.leaf[self.rem]);
            }
            let id = self.stack.pop()?;
            match &self.g.rules[id as usize] {
                Rule::Leaf(s) => {
                    self.leaf = s;
                    self.rem = s.len();
                }
                Rule::Node(b, c) => {
                    self.stack.push(*b);
                    self.stack.push(*c);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collection::{example_script, generate, GenParams, Model};

    #[test]
    fn fixture_grammar_shape() {
        let (base, script) = example_script();
        let g = Grammar::from_script(&base, &script, 1).unwrap();
        assert_eq!(g.num_leaves(), 7);
        assert_eq!(g.num_nodes(), 13);
        assert_eq!(g.expand(g.start(1)), b"abracada");
        assert_eq!(g.expand(g.start(2)), b"abrakada");
        assert_eq!(g.expand(g.start(3)), b"ablakada");
        // Shared subtrees: the two edited documents reuse the base prefix.
        let (s1b, _) = match *g.rule(g.start(1)) {
            Rule::Node(b, c) => (b, c),
            _ => panic!(),
        };
        let (s2b, _) = match *g.rule(g.start(2)) {
            Rule::Node(b, c) => (b, c),
            _ => panic!(),
        };
        assert_eq!(s1b, s2b);
        assert_eq!(g.expand(s1b), b"abra");
    }

    #[test]
    fn fixture_occurrence_counts() {
        let (base, script) = example_script();
        let g = Grammar::from_script(&base, &script, 1).unwrap();
        let counts = g.occurrence_counts();
        let by_expansion = |s: &[u8]| -> u64 {
            (0..g.num_rules() as u32)
                .filter(|&id| g.expand(id) == s)
                .map(|id| counts[id as usize])
                .sum()
        };
        assert_eq!(by_expansion(b"a"), 12);
        assert_eq!(by_expansion(b"da"), 3);
        assert_eq!(by_expansion(b"ab"), 3);
        assert_eq!(by_expansion(b"ka"), 2);
        assert_eq!(by_expansion(b"la"), 1);
        assert_eq!(by_expansion(b"abra"), 2);
    }

    #[test]
    fn script_grammar_matches_replay() {
        for model in [Model::Single, Model::Range, Model::Subtree] {
            for seed in 0..8 {
                for ms_len in [1usize, 3] {
                    let (coll, script) = generate(&GenParams {
                        seed,
                        n: 45,
                        docs: 7,
                        edits: 14,
                        sigma: 3,
                        model,
                    })
                    .unwrap();
                    let g = Grammar::from_script(coll.base(), &script, ms_len).unwrap();
                    g.verify_expansions(coll.documents()).unwrap();
                }
            }
        }
    }

    #[test]
    fn document_grammar_roundtrip() {
        let docs = vec![b"mississippi".to_vec(), b"mississippi".to_vec(), b"missouri".to_vec()];
        for ms_len in [1usize, 2, 4] {
            let g = Grammar::from_documents(&docs, ms_len).unwrap();
            g.verify_expansions(&docs).unwrap();
            // Identical documents share one start rule.
            assert_eq!(g.start(1), g.start(2));
            for id in 0..g.num_rules() as u32 {
                if let Rule::Leaf(s) = g.rule(id) {
                    assert!(s.len() <= ms_len);
                }
            }
        }
    }

    #[test]
    fn heights_stay_logarithmic_under_inserts() {
        let (coll, script) = generate(&GenParams {
            seed: 42,
            n: 10,
            docs: 12,
            edits: 80,
            sigma: 2,
            model: Model::Range,
        })
        .unwrap();
        let g = Grammar::from_script(coll.base(), &script, 1).unwrap();
        fn audit(g: &Grammar, id: u32, heights: &mut Vec<u32>) -> u32 {
            if heights[id as usize] != 0 {
                return heights[id as usize];
            }
            let h = match *g.rule(id) {
                Rule::Leaf(_) => 1,
                Rule::Node(b, c) => {
                    let hb = audit(g, b, heights);
                    let hc = audit(g, c, heights);
                    assert!(hb.abs_diff(hc) <= 1, "unbalanced node {id}");
                    1 + hb.max(hc)
                }
            };
            heights[id as usize] = h;
            h
        }
        let mut heights = vec![0u32; g.num_rules()];
        for d in 1..=g.num_docs() {
            let h = audit(&g, g.start(d), &mut heights);
            let n = g.exp_len(g.start(d)).max(2) as f64;
            assert!((h as f64) <= 1.45 * n.log2() + 2.5, "height {h} for length {n}");
        }
    }

    #[test]
    fn iterators_match_expansion() {
        let (coll, script) = generate(&GenParams {
            seed: 5,
            n: 30,
            docs: 5,
            edits: 10,
            sigma: 4,
            model: Model::Range,
        })
        .unwrap();
        let g = Grammar::from_script(coll.base(), &script, 2).unwrap();
        for d in 1..=g.num_docs() {
            let id = g.start(d);
            let full = g.expand(id);
            assert_eq!(g.prefix_bytes(id).collect::<Vec<_>>(), full);
            let mut rev: Vec<u8> = g.suffix_rev_bytes(id).collect();
            rev.reverse();
            assert_eq!(rev, full);
        }
    }

    #[test]
    fn extract_matches_slices() {
        let docs = vec![b"the quick brown fox jumps over the lazy dog".to_vec()];
        let g = Grammar::from_documents(&docs, 3).unwrap();
        let id = g.start(1);
        let n = docs[0].len() as u64;
        for from in 1..=n {
            for to in from..=n {
                assert_eq!(g.extract(id, from, to), docs[0][from as usize - 1..to as usize]);
            }
        }
    }

    #[test]
    fn orphans_are_collected() {
        // A long range of inserts and reverts churns intermediate roots;
        // every surviving rule must be reachable from some start.
        let (coll, script) = generate(&GenParams {
            seed: 9,
            n: 20,
            docs: 10,
            edits: 40,
            sigma: 2,
            model: Model::Single,
        })
        .unwrap();
        let g = Grammar::from_script(coll.base(), &script, 1).unwrap();
        let mut reach = vec![false; g.num_rules()];
        let mut stack: Vec<u32> = (1..=g.num_docs()).map(|d| g.start(d)).collect();
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut reach[id as usize], true) {
                continue;
            }
            if let Rule::Node(b, c) = *g.rule(id) {
                stack.push(b);
                stack.push(c);
            }
        }
        assert!(reach.iter().all(|&r| r));
    }

    #[test]
    fn assemble_rejects_forward_references() {
        let rules = vec![Rule::Node(1, 1), Rule::Leaf(b"a".to_vec())];
        assert!(matches!(
            Grammar::assemble(rules, vec![0], 1),
            Err(Error::Corrupt(_))
        ));
    }
}
