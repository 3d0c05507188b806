//! Succinct building blocks: bitvectors, sparse bitvectors, range-minimum
//! structures and the distinct-range reference algorithms built on them.
//!
//! All public positions are 1-based; `rank(k)` counts within the first `k`
//! positions, so `rank(0) == 0` and `rank(len)` is the total.

mod bits;
mod distinct;
mod rmq;
mod sparse;

pub use bits::{BitBuilder, BitVector};
pub use distinct::{
    distinct_marked, distinct_rmq, distinct_scan, leftist_distinct, prev_occurrence_table,
    Distinct, ScratchSet,
};
pub use rmq::{Candidates, Rmq, RunLengthRmq};
pub use sparse::SparseBitVector;
