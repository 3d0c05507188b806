//! Range-minimum structures.
//!
//! [`Rmq`] is a sparse table whose cells store (value, position) pairs, so
//! queries need no access to the indexed array; ties break to the leftmost
//! position. This costs O(u log u) words rather than the 2u + o(u) bits of
//! the succinct alternative; `size_bits` reports the real footprint.
//!
//! [`RunLengthRmq`] answers range-minimum queries over an array cut into
//! maximal nondecreasing runs while storing only a sparse run-head mark
//! vector and an inner [`Rmq`] over the run-head values. The indexed array
//! is dropped after construction. A query returns two candidate positions:
//! the left endpoint of the range plus the best run head inside it; the true
//! minimum is always one of the two.


use super::sparse::SparseBitVector;

/// Sparse-table RMQ with leftmost tie-breaking, usable without the array.
#[derive(Clone, Debug)]
pub struct Rmq {
    len: usize,
    /// levels[k][i] = (min value, leftmost 1-based argmin) of values[i..i+2^k].
    levels: Vec<Vec<(i64, u32)>>,
    retained: Option<Vec<i64>>,
}

impl Rmq {
    /// Builds over `values`; `retain` keeps a copy accessible via [`Rmq::value`].
    pub fn new(values: &[i64], retain: bool) -> Self {
        let n = values.len();
        let mut levels = Vec::new();
        let base: Vec<(i64, u32)> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, (i + 1) as u32))
            .collect();
        levels.push(base);
        let mut width = 1usize;
        while width * 2 <= n {
            let prev = levels.last().unwrap();
            let mut next = Vec::with_capacity(n - width * 2 + 1);
            for i in 0..=(n - width * 2) {
                let a = prev[i];
                let b = prev[i + width];
                next.push(if b.0 < a.0 { b } else { a });
            }
            levels.push(next);
            width *= 2;
        }
        Rmq {
            len: n,
            levels,
            retained: retain.then(|| values.to_vec()),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Leftmost position of the minimum in `values[i..=j]`, 1-based inclusive.
    pub fn rmq(&self, i: usize, j: usize) -> usize {
        assert!(1 <= i && i <= j && j <= self.len, "rmq range [{i},{j}] out of bounds");
        let span = j - i + 1;
        let k = (usize::BITS - 1 - span.leading_zeros()) as usize;
        let a = self.levels[k][i - 1];
        let b = self.levels[k][j + 1 - (1 << k) - 1];
        if b.0 < a.0 {
            b.1 as usize
        } else {
            a.1 as usize
        }
    }

    /// Minimum value in `values[i..=j]`.
    pub fn min_value(&self, i: usize, j: usize) -> i64 {
        let span = j - i + 1;
        let k = (usize::BITS - 1 - span.leading_zeros()) as usize;
        let a = self.levels[k][i - 1];
        let b = self.levels[k][j + 1 - (1 << k) - 1];
        a.0.min(b.0)
    }

    /// Original value at 1-based `i`; panics unless built with `retain`.
    pub fn value(&self, i: usize) -> i64 {
        self.retained.as_ref().expect("array not retained")[i - 1]
    }

    pub fn size_bits(&self) -> usize {
        let cells: usize = self.levels.iter().map(Vec::len).sum();
        cells * (64 + 32) + self.retained.as_ref().map_or(0, |r| r.len() * 64)
    }
}

/// Candidate positions returned by [`RunLengthRmq::candidates`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidates {
    /// Left endpoint of the query range: always a candidate.
    pub left: usize,
    /// Best run head inside the range, absent when the range contains none.
    pub head: Option<usize>,
}

/// Run-length range-minimum structure over an array of `len` entries cut
/// into `runs` maximal nondecreasing runs.
#[derive(Clone, Debug)]
pub struct RunLengthRmq {
    len: usize,
    /// Marks 1-based run-head positions: position 1 always, then every k
    /// with values[k] < values[k-1].
    heads: SparseBitVector,
    /// RMQ over the run-head values, queried without the values themselves.
    inner: Rmq,
}

impl RunLengthRmq {
    pub fn new(values: &[i64]) -> Self {
        assert!(!values.is_empty(), "cannot build over an empty array");
        let mut head_positions = Vec::new();
        let mut head_values = Vec::new();
        for (i, &v) in values.iter().enumerate() {
            if i == 0 || v < values[i - 1] {
                head_positions.push(i + 1);
                head_values.push(v);
            }
        }
        RunLengthRmq {
            len: values.len(),
            heads: SparseBitVector::from_positions(values.len(), &head_positions),
            inner: Rmq::new(&head_values, false),
        }
    }

    /// Rebuilds from serialized parts: head positions plus head values.
    pub fn from_parts(len: usize, head_positions: &[usize], head_values: &[i64]) -> Self {
        assert_eq!(head_positions.len(), head_values.len());
        RunLengthRmq {
            len,
            heads: SparseBitVector::from_positions(len, head_positions),
            inner: Rmq::new(head_values, false),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of maximal nondecreasing runs.
    pub fn runs(&self) -> usize {
        self.heads.count_ones()
    }

    /// 1-based positions of the run heads.
    pub fn head_positions(&self) -> Vec<usize> {
        self.heads.positions()
    }

    /// Values at the run heads, in head order.
    pub fn head_values(&self) -> Vec<i64> {
        (1..=self.runs()).map(|k| self.inner.min_value(k, k)).collect()
    }

    /// The two candidate positions for the minimum of `values[i..=j]`.
    ///
    /// The minimum of any range lies either at its left endpoint or at a run
    /// head inside it, because values grow within a run. The head candidate
    /// is the leftmost-minimal run head in `[i, j]`.
    pub fn candidates(&self, i: usize, j: usize) -> Candidates {
        assert!(1 <= i && i <= j && j <= self.len, "range [{i},{j}] out of bounds");
        let first = self.heads.rank1(i - 1) + 1;
        let last = self.heads.rank1(j);
        let head = if first > last {
            None
        } else {
            Some(self.heads.select1(self.inner.rmq(first, last)).unwrap())
        };
        Candidates { left: i, head }
    }

    pub fn size_bits(&self) -> usize {
        self.heads.size_bits() + self.inner.size_bits()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan_argmin(values: &[i64], i: usize, j: usize) -> usize {
        let mut best = i;
        for k in i..=j {
            if values[k - 1] < values[best - 1] {
                best = k;
            }
        }
        best
    }

    #[test]
    fn single_element() {
        let r = Rmq::new(&[42], true);
        assert_eq!(r.rmq(1, 1), 1);
        assert_eq!(r.value(1), 42);
    }

    #[test]
    fn leftmost_tie_break() {
        let r = Rmq::new(&[5, 3, 3, 3, 7], false);
        assert_eq!(r.rmq(1, 5), 2);
        assert_eq!(r.rmq(3, 5), 3);
        assert_eq!(r.rmq(4, 4), 4);
    }

    #[test]
    fn matches_scan_on_random_arrays() {
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for &n in &[1usize, 2, 5, 17, 64, 100] {
            let values: Vec<i64> = (0..n).map(|_| (next() % 10) as i64).collect();
            let r = Rmq::new(&values, false);
            for i in 1..=n {
                for j in i..=n {
                    assert_eq!(r.rmq(i, j), scan_argmin(&values, i, j));
                }
            }
        }
    }

    #[test]
    fn example_array_runs() {
        // Previous-occurrence array of the worked document-listing example.
        let e: Vec<i64> = vec![0, 0, 0, 1, 4, 5, 2, 3, 7, 8, 10, 6, 9];
        let rl = RunLengthRmq::new(&e);
        assert_eq!(rl.runs(), 3);
        assert_eq!(rl.head_positions(), vec![1, 7, 12]);
        let c = rl.candidates(5, 13);
        assert_eq!(c.left, 5);
        assert_eq!(c.head, Some(7));
        // Inner search over run-head indices: heads 2..=3 with values 2 and 6.
        let c2 = rl.candidates(8, 13);
        assert_eq!(c2.head, Some(12));
    }

    #[test]
    fn head_candidate_absent_inside_run() {
        let rl = RunLengthRmq::new(&[1, 2, 3, 4, 5]);
        assert_eq!(rl.runs(), 1);
        let c = rl.candidates(2, 5);
        assert_eq!(c.head, None);
        let c = rl.candidates(1, 5);
        assert_eq!(c.head, Some(1));
    }

    #[test]
    fn candidates_cover_true_minimum() {
        let mut state = 0x853c49e6748fea9bu64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..50 {
            let n = 1 + (next() % 40) as usize;
            let values: Vec<i64> = (0..n).map(|_| (next() % 8) as i64).collect();
            let rl = RunLengthRmq::new(&values);
            for i in 1..=n {
                for j in i..=n {
                    let c = rl.candidates(i, j);
                    let truth = scan_argmin(&values, i, j);
                    let min = values[truth - 1];
                    let left_v = values[c.left - 1];
                    let head_v = c.head.map(|h| values[h - 1]);
                    assert!(
                        left_v == min || head_v == Some(min),
                        "range [{i},{j}] of {values:?}: candidates {c:?} miss min {min}"
                    );
                    if let Some(h) = c.head {
                        assert!((i..=j).contains(&h));
                    }
                }
            }
        }
    }
}
