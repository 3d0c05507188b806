//! Compressed indexing for repetitive document collections.
//!
//! The crate builds a grammar-compressed index over a collection of similar
//! documents and answers, directly on the compressed representation:
//!
//! * `list(P)` - which documents contain pattern P,
//! * `count(P)` - how many times P occurs in total,
//! * `locate(P)` - every `(document, offset)` occurrence of P.
//!
//! The pipeline is: [`collection`] materializes documents (generated from an
//! edit script or ingested from files); [`grammar`] parses them into a shared
//! straight-line grammar; [`index`] arranges the binary rules as points of a
//! wavelet-tree grid ([`grid`]) searched by pattern cuts; [`doclist`] attaches
//! inverted lists and run-length range-minimum structures to the grid nodes
//! for output-sensitive document listing. [`container`] serializes the whole
//! index as a single checksummed file.

pub mod collection;
pub mod container;
pub mod doclist;
pub mod error;
pub mod grammar;
pub mod grid;
pub mod index;
pub mod stats;
pub mod succinct;

pub use collection::{Collection, EditScript, GenParams};
pub use doclist::{DocIndex, ListingResult, ListingStats};
pub use error::{Error, Result};
pub use grammar::Grammar;
pub use grid::Grid;
pub use index::{Occurrence, PatternIndex};

use std::path::Path;

/// Build-time knobs; defaults follow the structure's design parameters.
#[derive(Clone, Debug)]
pub struct BuildOptions {
    /// Maximum terminal (metasymbol) length; 1 parses single symbols.
    pub ms_len: usize,
    /// Upward-tracking sample exponent: one back-pointer every ceil(p^epsilon)
    /// positions per node.
    pub epsilon: f64,
    /// Weight prefix-sum sample step; 0 selects ceil(log2 p).
    pub tau: usize,
    /// Store list access keyed by leaf labels (false) or root positions (true).
    pub root_layout: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            ms_len: 1,
            epsilon: 0.5,
            tau: 0,
            root_layout: false,
        }
    }
}

/// A complete searchable index over one collection.
pub struct Index {
    pub pattern: PatternIndex,
    pub doc: DocIndex,
    pub options: BuildOptions,
}

impl Index {
    /// Builds the full index for `collection`.
    pub fn build(collection: &Collection, options: &BuildOptions) -> Result<Index> {
        let grammar = match collection.script() {
            Some(script) => Grammar::from_script(collection.base(), script, options.ms_len)?,
            None => Grammar::from_documents(collection.documents(), options.ms_len)?,
        };
        grammar.verify_expansions(collection.documents())?;
        let pattern = PatternIndex::build(grammar, options)?;
        let doc = DocIndex::build(&pattern, collection, options)?;
        Ok(Index {
            pattern,
            doc,
            options: options.clone(),
        })
    }

    /// Documents containing `pattern`, ascending, plus discovery order and stats.
    pub fn list(&self, pattern: &[u8]) -> Result<ListingResult> {
        self.doc.list(&self.pattern, pattern)
    }

    /// Total number of occurrences of `pattern`.
    pub fn count(&self, pattern: &[u8]) -> Result<u64> {
        self.pattern
            .count(pattern, self.doc.short_table().map(|t| t as &dyn index::ShortCounts))
    }

    /// Every occurrence of `pattern`, sorted by `(document, offset)`.
    pub fn locate(&self, pattern: &[u8]) -> Result<Vec<Occurrence>> {
        self.pattern.locate(pattern)
    }

    /// Extracts `doc[from..=to]` (1-based inclusive) from the grammar alone.
    pub fn extract(&self, doc: u32, from: u64, to: u64) -> Result<Vec<u8>> {
        self.pattern.extract(doc, from, to)
    }

    /// Space and shape report.
    pub fn stats(&self) -> stats::IndexStats {
        stats::IndexStats::gather(self)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        container::save(self, path)
    }

    pub fn load(path: &Path) -> Result<Index> {
        container::load(path)
    }
}
