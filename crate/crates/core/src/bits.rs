//! Bit-packed storage and the colexicographic ranking used for every edge and
//! hyperedge array in the crate.
//!
//! Vertices are 1-based. A pair `i < j` has colex rank `C(j-1, 2) + (i-1)`, and
//! an increasing subset `v_1 < ... < v_s` has rank `sum_t C(v_t - 1, t)`. The
//! rank does not depend on the vertex count, so the edges of the subgraph on
//! the first `m` vertices are exactly the first `C(m, 2)` bits.

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

/// Binomial coefficient. Panics if the result does not fit in a `u64`.
pub fn binom(n: u64, k: u64) -> u64 {
    checked_binom(n, k).unwrap_or_else(|| panic!("C({n}, {k}) overflows u64"))
}

pub fn checked_binom(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

pub fn binom_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `⌈log₂ x⌉` for `x ≥ 1`; `ceil_log2(1) == 0`.
pub fn ceil_log2(x: u64) -> u32 {
    assert!(x >= 1, "ceil_log2 of zero");
    if x == 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Number of bits a register needs to hold every value in `0..=max`.
pub fn bits_for(max: u64) -> u64 {
    u64::from(64 - max.leading_zeros()).max(1)
}

/// Colex rank of the pair `{i, j}` (1-based, any order, `i != j`).
pub fn edge_index(i: u32, j: u32, n: u32) -> Result<u64> {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    if a == 0 || a == b || b > n {
        return Err(Error::MalformedSubset(format!("pair ({i}, {j}) with n = {n}")));
    }
    Ok(pair_rank(a, b))
}

#[inline]
pub(crate) fn pair_rank(i: u32, j: u32) -> u64 {
    debug_assert!(0 < i && i < j);
    let j1 = u64::from(j) - 1;
    j1 * (j1 - 1) / 2 + u64::from(i) - 1
}

/// Inverse of [`edge_index`]: the pair `(i, j)` with `i < j`.
pub fn edge_unrank(rank: u64) -> (u32, u32) {
    // largest j with C(j-1, 2) <= rank
    let mut j1 = ((((8 * rank + 1) as f64).sqrt() + 1.0) / 2.0) as u64;
    while j1 * j1.saturating_sub(1) / 2 > rank {
        j1 -= 1;
    }
    while (j1 + 1) * j1 / 2 <= rank {
        j1 += 1;
    }
    let i = rank - j1 * (j1 - 1) / 2 + 1;
    (i as u32, (j1 + 1) as u32)
}

/// Colex rank of a strictly increasing 1-based subset of `[n]`.
pub fn subset_rank(subset: &[u32], n: u32) -> Result<u64> {
    let mut prev = 0u32;
    for &v in subset {
        if v <= prev || v > n {
            return Err(Error::MalformedSubset(format!("{subset:?} with n = {n}")));
        }
        prev = v;
    }
    Ok(subset_rank_unchecked(subset))
}

#[inline]
pub(crate) fn subset_rank_unchecked(subset: &[u32]) -> u64 {
    subset.iter().enumerate().map(|(t, &v)| binom(u64::from(v) - 1, t as u64 + 1)).sum()
}

/// Inverse of [`subset_rank`] for `s`-subsets.
pub fn subset_unrank(mut rank: u64, s: usize) -> Vec<u32> {
    let mut out = vec![0u32; s];
    for t in (1..=s).rev() {
        // largest v with C(v-1, t) <= rank
        let mut v = t as u64;
        while binom(v, t as u64) <= rank {
            v += 1;
        }
        out[t - 1] = v as u32;
        rank -= binom(v - 1, t as u64);
    }
    out
}

/// A fixed-length bit array, LSB-first within 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PackedBits {
    words: Vec<u64>,
    len: u64,
}

impl std::fmt::Debug for PackedBits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PackedBits[{}; ", self.len)?;
        for i in 0..self.len.min(64) {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        if self.len > 64 {
            write!(f, "...")?;
        }
        write!(f, "]")
    }
}

impl PackedBits {
    pub fn zeros(len: u64) -> Self {
        PackedBits { words: vec![0; len.div_ceil(64) as usize], len }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = Self::zeros(bits.len() as u64);
        for (i, &b) in bits.iter().enumerate() {
            out.set(i as u64, b);
        }
        out
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: u64) -> bool {
        debug_assert!(i < self.len);
        (self.words[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: u64, bit: bool) {
        debug_assert!(i < self.len);
        let w = &mut self.words[(i / 64) as usize];
        if bit {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Bytes in rank order, little-endian within each byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8) as usize;
        self.words.iter().flat_map(|w| w.to_le_bytes()).take(nbytes).collect()
    }

    pub fn from_bytes(bytes: &[u8], len: u64) -> Result<Self> {
        if (bytes.len() as u64) < len.div_ceil(8) {
            return Err(Error::MalformedFile(format!(
                "need {} bytes for {len} bits, got {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        let mut out = Self::zeros(len);
        for (wi, chunk) in bytes[..len.div_ceil(8) as usize].chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            out.words[wi] = u64::from_le_bytes(buf);
        }
        // clear padding bits past len
        if !len.is_multiple_of(64) {
            if let Some(last) = out.words.last_mut() {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
        Ok(out)
    }
}
