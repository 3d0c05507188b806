//! Sparse bitvector in Elias-Fano encoding.
//!
//! Stores `k` one-positions over a universe of `t` bits in roughly
//! `k * (2 + log2(t/k))` bits: each 0-based value is split into `low_bits`
//! low bits, stored verbatim, and a high part, stored in unary inside an
//! auxiliary plain bitvector. `select1` is answered by one select on the
//! high part; `rank1` locates the high-part bucket with a select0 and then
//! binary-searches the bucket's low parts.
//!
//! Positions are 1-based as in [`BitVector`](super::BitVector).

use super::bits::BitVector;

#[derive(Clone, Debug)]
pub struct SparseBitVector {
    universe: usize,
    ones: usize,
    low_bits: u32,
    lows: Vec<u64>,
    high: BitVector,
}

impl SparseBitVector {
    /// Builds from strictly increasing 1-based positions in `1..=universe`.
    pub fn from_positions(universe: usize, positions: &[usize]) -> Self {
        let ones = positions.len();
        let mut prev = 0usize;
        for &p in positions {
            assert!(p > prev && p <= universe, "positions must be strictly increasing and within the universe");
            prev = p;
        }
        let low_bits = match universe.checked_div(ones) {
            None | Some(0) | Some(1) => 0,
            Some(ratio) => usize::BITS - 1 - ratio.leading_zeros(),
        };
        let mut lows = vec![0u64; (ones as u64 * low_bits as u64).div_ceil(64) as usize];
        let high_len = ones + (if universe == 0 { 0 } else { (universe - 1) >> low_bits }) + 1;
        let mut high_words = vec![0u64; high_len.div_ceil(64)];
        for (i, &p) in positions.iter().enumerate() {
            let v = p - 1;
            if low_bits > 0 {
                let low = (v as u64) & ((1u64 << low_bits) - 1);
                let bit = i as u64 * low_bits as u64;
                let (w, off) = ((bit / 64) as usize, (bit % 64) as u32);
                lows[w] |= low << off;
                if off + low_bits > 64 {
                    lows[w + 1] |= low >> (64 - off);
                }
            }
            let hpos = (v >> low_bits) + i;
            high_words[hpos / 64] |= 1u64 << (hpos % 64);
        }
        SparseBitVector {
            universe,
            ones,
            low_bits,
            lows,
            high: BitVector::from_raw(high_words, high_len),
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    fn low(&self, i: usize) -> u64 {
        if self.low_bits == 0 {
            return 0;
        }
        let bit = i as u64 * self.low_bits as u64;
        let (w, off) = ((bit / 64) as usize, (bit % 64) as u32);
        let mut v = self.lows[w] >> off;
        if off + self.low_bits > 64 {
            v |= self.lows[w + 1] << (64 - off);
        }
        v & ((1u64 << self.low_bits) - 1)
    }

    /// 0-based value of the i-th stored position (i 0-based).
    fn value(&self, i: usize) -> usize {
        let h = self.high.select1(i + 1).expect("index in range") - 1 - i;
        (h << self.low_bits) | self.low(i) as usize
    }

    /// 1-based position of the j-th one, `None` if out of range.
    pub fn select1(&self, j: usize) -> Option<usize> {
        if j == 0 || j > self.ones {
            return None;
        }
        Some(self.value(j - 1) + 1)
    }

    /// Number of ones among the first `k` bits, `0 <= k <= universe`.
    pub fn rank1(&self, k: usize) -> usize {
        assert!(k <= self.universe, "rank position {k} out of range");
        if self.ones == 0 || k == 0 {
            return 0;
        }
        // Count stored values < k.
        let hb = (k - 1) >> self.low_bits; // highest bucket that could hold a value < k
        let bucket_start = |b: usize| -> usize {
            if b == 0 {
                0
            } else {
                // ones strictly before the b-th zero in the high part
                match self.high.select0(b) {
                    Some(p) => p - b,
                    None => self.ones,
                }
            }
        };
        let mut lo = bucket_start(hb);
        let mut hi = bucket_start(hb + 1);
        debug_assert!(lo <= hi && hi <= self.ones);
        // Values in bucket hb share the high part hb; compare low parts with k.
        while lo < hi {
            let mid = (lo + hi) / 2;
            let v = (hb << self.low_bits) | self.low(mid) as usize;
            if v < k {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    pub fn positions(&self) -> Vec<usize> {
        (0..self.ones).map(|i| self.value(i) + 1).collect()
    }

    pub fn size_bits(&self) -> usize {
        self.lows.len() * 64 + self.high.size_bits() + 128
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(universe: usize, positions: &[usize]) {
        let sv = SparseBitVector::from_positions(universe, positions);
        assert_eq!(sv.count_ones(), positions.len());
        for (j, &p) in positions.iter().enumerate() {
            assert_eq!(sv.select1(j + 1), Some(p));
        }
        assert_eq!(sv.select1(positions.len() + 1), None);
        let mut expect = 0;
        let mut iter = positions.iter().peekable();
        for k in 0..=universe {
            while let Some(&&p) = iter.peek() {
                if p <= k {
                    expect += 1;
                    iter.next();
                } else {
                    break;
                }
            }
            assert_eq!(sv.rank1(k), expect, "rank({k}) over {positions:?}");
        }
    }

    #[test]
    fn empty_and_full() {
        check(0, &[]);
        check(10, &[]);
        check(5, &[1, 2, 3, 4, 5]);
    }

    #[test]
    fn run_head_marks_example() {
        let f = SparseBitVector::from_positions(13, &[1, 7, 12]);
        assert_eq!(f.rank1(13), 3);
        assert_eq!(f.select1(2), Some(7));
        assert_eq!(f.rank1(4) + 1, 2);
    }

    #[test]
    fn assorted_densities() {
        check(1, &[1]);
        check(1000, &[1000]);
        check(1000, &[1, 500, 999, 1000]);
        check(64, &(1..=64).collect::<Vec<_>>());
        let sparse: Vec<usize> = (1..=20).map(|i| i * 400).collect();
        check(8000, &sparse);
    }

    #[test]
    fn space_is_near_information_bound() {
        // k log(t/k) + 2k bits plus small directories, within a documented
        // constant factor (see RunLengthRmq::size_bits docs).
        let positions: Vec<usize> = (1..=100).map(|i| i * 1000).collect();
        let sv = SparseBitVector::from_positions(100_000, &positions);
        let k = 100f64;
        let bound = k * ((100_000f64 / k).log2() + 2.0);
        assert!((sv.size_bits() as f64) <= 6.0 * bound + 256.0);
    }
}
