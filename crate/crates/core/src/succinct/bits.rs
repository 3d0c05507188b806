//! Plain bitvector with constant-time rank and logarithmic select.
//!
//! Positions are 1-based throughout: `get(i)` reads bit `i` for
//! `1 <= i <= len`, `rank1(k)` counts ones among the first `k` bits
//! (`rank1(0) == 0`), and `select1(j)` returns the 1-based position of the
//! j-th one. The rank directory stores one cumulative 32-bit counter per
//! 64-bit word, so the overhead is 50% of the payload; sizes are reported
//! honestly by `size_bits`.

/// Mutable bit buffer used while constructing a [`BitVector`].
#[derive(Default)]
pub struct BitBuilder {
    words: Vec<u64>,
    len: usize,
}

impl BitBuilder {
    pub fn with_capacity(bits: usize) -> Self {
        BitBuilder {
            words: Vec::with_capacity(bits / 64 + 1),
            len: 0,
        }
    }

    pub fn push(&mut self, bit: bool) {
        let word = self.len / 64;
        if word == self.words.len() {
            self.words.push(0);
        }
        if bit {
            self.words[word] |= 1u64 << (self.len % 64);
        }
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn finish(self) -> BitVector {
        BitVector::from_raw(self.words, self.len)
    }
}

/// Immutable bitvector with rank/select support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
    /// ranks[w] = number of ones in words[..w].
    ranks: Vec<u32>,
    ones: usize,
}

impl BitVector {
    /// Builds from raw little-endian words; bits past `len` must be zero.
    pub fn from_raw(mut words: Vec<u64>, len: usize) -> Self {
        let need = len.div_ceil(64);
        assert!(words.len() >= need, "word buffer shorter than len");
        words.truncate(need);
        if !len.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
        let mut ranks = Vec::with_capacity(words.len() + 1);
        let mut acc = 0u32;
        for &w in &words {
            ranks.push(acc);
            acc += w.count_ones();
        }
        ranks.push(acc);
        BitVector {
            words,
            len,
            ranks,
            ones: acc as usize,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut b = BitBuilder::with_capacity(bits.len());
        for &bit in bits {
            b.push(bit);
        }
        b.finish()
    }

    /// Builds a vector of `len` bits with ones at the given 1-based positions.
    pub fn from_positions(len: usize, ones: &[usize]) -> Self {
        let mut words = vec![0u64; len.div_ceil(64)];
        for &p in ones {
            assert!((1..=len).contains(&p), "position {p} out of range 1..={len}");
            words[(p - 1) / 64] |= 1u64 << ((p - 1) % 64);
        }
        BitVector::from_raw(words, len)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.ones
    }

    /// Reads bit `i`, 1-based.
    pub fn get(&self, i: usize) -> bool {
        assert!((1..=self.len).contains(&i), "bit index {i} out of range");
        self.words[(i - 1) / 64] >> ((i - 1) % 64) & 1 == 1
    }

    /// Number of ones among the first `k` bits, `0 <= k <= len`.
    pub fn rank1(&self, k: usize) -> usize {
        assert!(k <= self.len, "rank position {k} out of range");
        let word = k / 64;
        let mut r = self.ranks[word] as usize;
        let rem = k % 64;
        if rem != 0 {
            r += (self.words[word] & ((1u64 << rem) - 1)).count_ones() as usize;
        }
        r
    }

    /// Number of zeros among the first `k` bits.
    pub fn rank0(&self, k: usize) -> usize {
        k - self.rank1(k)
    }

    /// 1-based position of the j-th one, `None` if fewer than `j` ones exist.
    pub fn select1(&self, j: usize) -> Option<usize> {
        if j == 0 || j > self.ones {
            return None;
        }
        // Last word whose cumulative rank is below j.
        let mut lo = 0usize;
        let mut hi = self.words.len();
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if (self.ranks[mid] as usize) < j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut remaining = j - self.ranks[lo] as usize;
        let mut w = self.words[lo];
        let mut pos = lo * 64;
        loop {
            let tz = w.trailing_zeros() as usize;
            pos += tz;
            w >>= tz;
            remaining -= 1;
            if remaining == 0 {
                return Some(pos + 1);
            }
            w >>= 1;
            pos += 1;
        }
    }

    /// 1-based position of the j-th zero, `None` if fewer than `j` zeros exist.
    pub fn select0(&self, j: usize) -> Option<usize> {
        if j == 0 || j > self.count_zeros() {
            return None;
        }
        let zeros_before = |w: usize| w * 64 - self.ranks[w] as usize;
        let mut lo = 0usize;
        let mut hi = self.words.len();
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if zeros_before(mid) < j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut remaining = j - zeros_before(lo);
        let mut w = !self.words[lo];
        let mut pos = lo * 64;
        loop {
            let tz = w.trailing_zeros() as usize;
            pos += tz;
            w >>= tz;
            remaining -= 1;
            if remaining == 0 {
                return Some(pos + 1);
            }
            w >>= 1;
            pos += 1;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Payload plus directory size in bits.
    pub fn size_bits(&self) -> usize {
        self.words.len() * 64 + self.ranks.len() * 32
    }
}
