//! Approximately uniform permutations built from raw bits, and the relabeling
//! views that use them.
//!
//! The `r` bits are cut into chunks of `⌈log₂ n⌉` bits, read most significant
//! bit first. A chunk holding `v` names the value `v + 1`; values above `n` are
//! skipped. `π(i)` is the `i`-th distinct value met in chunk order, or `1` when
//! fewer than `i` distinct values occur.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::bits::{binom, binom_big, ceil_log2, PackedBits};
use crate::error::{Error, Result};
use crate::graph::{check_pair, GraphOracle};
use crate::tape::{BitTape, WorkspaceMeter};

/// Bits the construction is usually given: `10·n·⌈log₂ n⌉²`.
pub fn default_perm_bits(n: u32) -> u64 {
    let c = u64::from(ceil_log2(n.max(1).into()));
    10 * u64::from(n) * c * c
}

/// Reads `len` bits starting at `offset` through the tape's counters.
pub(crate) fn read_range(tape: &BitTape, offset: u64, len: u64) -> Result<PackedBits> {
    let end = offset.saturating_add(len);
    if end > tape.len() {
        return Err(Error::InsufficientRandomness { needed: end, available: tape.len() });
    }
    let mut out = PackedBits::zeros(len);
    for i in 0..len {
        out.set(i, tape.read(offset + i)?);
    }
    Ok(out)
}

/// A map `[n] → [n]`, 1-based.
pub trait VertexPermutation: Send + Sync {
    fn size(&self) -> u32;
    fn apply(&self, i: u32) -> u32;
}

/// An explicitly listed permutation; `images[i-1] = π(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExplicitPerm {
    images: Vec<u32>,
}

impl ExplicitPerm {
    pub fn new(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &v in &images {
            if v == 0 || v as usize > n || seen[v as usize] {
                return Err(Error::param(format!("{images:?} is not a permutation")));
            }
            seen[v as usize] = true;
        }
        Ok(ExplicitPerm { images })
    }

    pub fn identity(n: u32) -> Self {
        ExplicitPerm { images: (1..=n).collect() }
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }
}

impl VertexPermutation for ExplicitPerm {
    fn size(&self) -> u32 {
        self.images.len() as u32
    }

    fn apply(&self, i: u32) -> u32 {
        self.images[i as usize - 1]
    }
}

/// The permutation defined by a snapshot of `r` random bits.
#[derive(Debug, Clone)]
pub struct PermFn {
    n: u32,
    width: u32,
    bits: Arc<PackedBits>,
    // first occurrences, in chunk order
    table: Vec<u32>,
}

impl PermFn {
    pub fn from_bits(n: u32, bits: PackedBits) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("permutation of an empty set"));
        }
        let width = ceil_log2(n.into());
        let mut table = Vec::new();
        let mut seen = vec![false; n as usize + 1];
        if width == 0 {
            table.push(1);
        } else {
            let chunks = bits.len() / u64::from(width);
            for c in 0..chunks {
                let v = chunk_value(&bits, c, width);
                if v <= n && !seen[v as usize] {
                    seen[v as usize] = true;
                    table.push(v);
                    if table.len() == n as usize {
                        break;
                    }
                }
            }
        }
        Ok(PermFn { n, width, bits: Arc::new(bits), table })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> u64 {
        self.bits.len()
    }

    pub fn chunk_width(&self) -> u32 {
        self.width
    }

    pub fn chunk_count(&self) -> u64 {
        if self.width == 0 {
            0
        } else {
            self.bits.len() / u64::from(self.width)
        }
    }

    /// Every value of `[n]` occurs in some chunk.
    pub fn covered(&self) -> bool {
        self.table.len() == self.n as usize
    }

    /// `π(i)` from the precomputed first-occurrence table.
    pub fn eval(&self, i: u32) -> u32 {
        assert!(1 <= i && i <= self.n, "pi({i}) outside [1, {}]", self.n);
        self.table.get(i as usize - 1).copied().unwrap_or(1)
    }

    pub fn images(&self) -> Vec<u32> {
        (1..=self.n).map(|i| self.eval(i)).collect()
    }
}

impl VertexPermutation for PermFn {
    fn size(&self) -> u32 {
        self.n
    }

    fn apply(&self, i: u32) -> u32 {
        self.eval(i)
    }
}

fn chunk_value(bits: &PackedBits, chunk: u64, width: u32) -> u32 {
    let start = chunk * u64::from(width);
    let mut v = 0u32;
    for t in 0..u64::from(width) {
        v = (v << 1) | u32::from(bits.get(start + t));
    }
    v + 1
}

/// Snapshots `r` bits of `bits` (from position 0) into a [`PermFn`] over `[n]`.
pub fn build_pi(n: u32, bits: &BitTape, r: u64) -> Result<PermFn> {
    if r < u64::from(ceil_log2(n.max(1).into())) {
        return Err(Error::param(format!("r = {r} is shorter than one chunk")));
    }
    PermFn::from_bits(n, read_range(bits, 0, r)?)
}

/// `π(i)` by the counting scan: a chunk counter, an inner counter that checks
/// whether the current value already occurred, and a distinct-value counter.
/// Nothing else is stored, so the metered peak stays logarithmic in `r`.
pub fn pi_eval(p: &PermFn, i: u32, meter: Option<&WorkspaceMeter>) -> Result<u32> {
    if i == 0 || i > p.n {
        return Err(Error::param(format!("pi({i}) outside [1, {}]", p.n)));
    }
    if p.width == 0 {
        return Ok(1);
    }
    let chunks = p.chunk_count();
    let _outer = meter.map(|m| m.counter("pi.chunk", chunks)).transpose()?;
    let _inner = meter.map(|m| m.counter("pi.inner", chunks)).transpose()?;
    let _count = meter.map(|m| m.counter("pi.distinct", p.n.into())).transpose()?;
    let _vals = meter.map(|m| m.charge("pi.values", 2 * u64::from(p.width) + 2)).transpose()?;
    let mut distinct = 0u32;
    for c in 0..chunks {
        let v = chunk_value(&p.bits, c, p.width);
        if v > p.n {
            continue;
        }
        let fresh = (0..c).all(|e| chunk_value(&p.bits, e, p.width) != v);
        if fresh {
            distinct += 1;
            if distinct == i {
                return Ok(v);
            }
        }
    }
    Ok(1)
}

/// The coupon-collector bound and, where cheap, the exact probability that
/// some value of `[n]` never occurs.
#[derive(Debug, Clone)]
pub struct TvBound {
    pub bound: f64,
    pub exact_failure: Option<BigRational>,
}

/// `n·exp(−r / (2n⌈log₂ n⌉))` plus the exact non-coverage probability by
/// inclusion–exclusion over the chunks.
pub fn tv_bound(n: u32, r: u64) -> Result<TvBound> {
    if n < 2 {
        return Err(Error::param("tv_bound needs n >= 2"));
    }
    let width = ceil_log2(n.into());
    let nf = f64::from(n);
    let bound = nf * (-(r as f64) / (2.0 * nf * f64::from(width))).exp();
    let chunks = r / u64::from(width);
    let exact_failure = (chunks <= 1 << 16 && n <= 256).then(|| coverage_failure(n, width, chunks));
    Ok(TvBound { bound, exact_failure })
}

/// `P(some value of [n] is missing from `chunks` uniform draws on [2^width])`.
pub fn coverage_failure(n: u32, width: u32, chunks: u64) -> BigRational {
    let side = BigUint::one() << width;
    let denom = BigInt::from(side.pow(chunks as u32));
    let mut acc = BigInt::zero();
    for j in 1..=u64::from(n) {
        let term = BigInt::from(binom_big(n.into(), j)) * BigInt::from((&side - BigUint::from(j)).pow(chunks as u32));
        if j % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    BigRational::new(acc, denom)
}

/// `edge(i, j) = src.edge(π(i), π(j))`; pairs that collapse onto one vertex
/// (possible only when `π` is not a bijection) read as non-edges.
pub struct Relabeled<G, P> {
    pub src: G,
    pub perm: P,
}

impl<G: GraphOracle, P: VertexPermutation> GraphOracle for Relabeled<G, P> {
    fn vertex_count(&self) -> u32 {
        self.src.vertex_count()
    }

    fn edge(&self, i: u32, j: u32) -> Result<bool> {
        let (a, b) = check_pair(i, j, self.src.vertex_count())?;
        let (pa, pb) = (self.perm.apply(a), self.perm.apply(b));
        if pa == pb {
            return Ok(false);
        }
        self.src.edge(pa, pb)
    }
}

pub fn relabel<G: GraphOracle, P: VertexPermutation>(src: G, perm: P) -> Result<Relabeled<G, P>> {
    if perm.size() != src.vertex_count() {
        return Err(Error::param(format!(
            "permutation of [{}] applied to a graph on {} vertices",
            perm.size(),
            src.vertex_count()
        )));
    }
    Ok(Relabeled { src, perm })
}

/// Relabels by a [`PermFn`] built from the first `10·n·⌈log₂ n⌉²` bits.
pub fn relabel_kpc_to_pc<G: GraphOracle>(src: G, bits: &BitTape) -> Result<Relabeled<G, PermFn>> {
    let n = src.vertex_count();
    let r = default_perm_bits(n);
    if bits.len() < r {
        return Err(Error::InsufficientRandomness { needed: r, available: bits.len() });
    }
    let perm = build_pi(n, bits, r)?;
    relabel(src, perm)
}

/// A k-partite planted graph assembled from raw bits: an ER graph on
/// `ell·k_s` vertices plus one permutation of `[ell]` per block, where the
/// vertex that block `j`'s permutation sends to 1 is planted.
pub struct KpcFromBits<P> {
    ell: u32,
    k_s: u32,
    er: PackedBits,
    perms: Vec<P>,
    planted: Vec<u32>,
}

/// Bits consumed by [`sample_kpc_from_bits`]: the ER part, then `k_s` blocks
/// of `10·ell·⌈log₂ ell⌉²` permutation bits.
pub fn kpc_from_bits_len(ell: u32, k_s: u32) -> u64 {
    binom(u64::from(ell) * u64::from(k_s), 2) + u64::from(k_s) * default_perm_bits(ell)
}

pub fn sample_kpc_from_bits(ell: u32, k_s: u32, bits: &BitTape) -> Result<KpcFromBits<PermFn>> {
    if ell == 0 || k_s == 0 {
        return Err(Error::param("ell and k_s must be positive"));
    }
    let needed = kpc_from_bits_len(ell, k_s);
    if bits.len() < needed {
        return Err(Error::InsufficientRandomness { needed, available: bits.len() });
    }
    let er_len = binom(u64::from(ell) * u64::from(k_s), 2);
    let er = read_range(bits, 0, er_len)?;
    let r = default_perm_bits(ell);
    let perms = (0..u64::from(k_s))
        .map(|j| PermFn::from_bits(ell, read_range(bits, er_len + j * r, r)?))
        .collect::<Result<Vec<_>>>()?;
    KpcFromBits::new(ell, k_s, er, perms)
}

impl<P: VertexPermutation> KpcFromBits<P> {
    pub fn new(ell: u32, k_s: u32, er: PackedBits, perms: Vec<P>) -> Result<Self> {
        if er.len() != binom(u64::from(ell) * u64::from(k_s), 2) || perms.len() != k_s as usize {
            return Err(Error::param("ER bits or permutation count do not match ell, k_s"));
        }
        if perms.iter().any(|p| p.size() != ell) {
            return Err(Error::param("every block permutation must act on [ell]"));
        }
        let mut planted = Vec::new();
        for (j, p) in perms.iter().enumerate() {
            for i in 1..=ell {
                if p.apply(i) == 1 {
                    planted.push(j as u32 * ell + i);
                }
            }
        }
        Ok(KpcFromBits { ell, k_s, er, perms, planted })
    }

    pub fn planted(&self) -> &[u32] {
        &self.planted
    }

    pub fn perms(&self) -> &[P] {
        &self.perms
    }

    /// `k_s · ell · exp(−r_perm / (2·ell·⌈log₂ ell⌉))`.
    pub fn tv_bound(&self) -> f64 {
        if self.ell < 2 {
            return 0.0;
        }
        f64::from(self.k_s) * tv_bound(self.ell, default_perm_bits(self.ell)).map(|t| t.bound).unwrap_or(0.0)
    }
}

impl<P: VertexPermutation> GraphOracle for KpcFromBits<P> {
    fn vertex_count(&self) -> u32 {
        self.ell * self.k_s
    }

    fn edge(&self, i: u32, j: u32) -> Result<bool> {
        let (a, b) = check_pair(i, j, self.vertex_count())?;
        if self.planted.binary_search(&a).is_ok() && self.planted.binary_search(&b).is_ok() {
            return Ok(true);
        }
        Ok(self.er.get(crate::bits::pair_rank(a, b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape::{AccessPolicy, BitStream};

    fn perm(n: u32, bits: &[bool]) -> PermFn {
        PermFn::from_bits(n, PackedBits::from_bools(bits)).unwrap()
    }

    #[test]
    fn tiny_traces() {
        let p = perm(2, &[true, false]);
        assert_eq!(p.images(), vec![2, 1]);
        assert!(p.covered());
        let p = perm(2, &[false; 6]);
        assert_eq!(p.images(), vec![1, 1]);
        assert!(!p.covered());
    }

    #[test]
    fn skips_out_of_range_chunks() {
        // n = 3, width 2: chunks 11 (=4, skipped), 10 (=3), 00 (=1), 01 (=2)
        let p = perm(3, &[true, true, true, false, false, false, false, true]);
        assert_eq!(p.images(), vec![3, 1, 2]);
    }

    #[test]
    fn scan_agrees_with_table() {
        let mut s = BitStream::new(11);
        for n in [2u32, 3, 5, 7, 9] {
            for r in [4u64, 30, default_perm_bits(n)] {
                let p = PermFn::from_bits(n, s.take_bits(r)).unwrap();
                for i in 1..=n {
                    assert_eq!(pi_eval(&p, i, None).unwrap(), p.eval(i), "n={n} r={r} i={i}");
                }
                if p.covered() {
                    let mut img = p.images();
                    img.sort();
                    assert_eq!(img, (1..=n).collect::<Vec<_>>());
                }
            }
        }
    }

    #[test]
    fn exact_failure_small() {
        let t = tv_bound(2, 6).unwrap();
        assert_eq!(t.exact_failure.unwrap(), BigRational::new(1.into(), 32.into()));
        assert!(tv_bound(2, 10_000).unwrap().bound < 1e-100);
        assert!(tv_bound(1, 4).is_err());
    }

    #[test]
    fn build_needs_bits() {
        let tape = BitTape::from_bools(&[true], AccessPolicy::MultipleAccess);
        assert!(build_pi(2, &tape, 4).is_err());
        assert!(build_pi(4, &tape, 1).is_err());
        let p = build_pi(2, &tape, 1).unwrap();
        assert_eq!(p.images(), vec![2, 1]);
        assert_eq!(tape.reads(), 1);
    }

    #[test]
    fn kpc_from_bits_single_block_is_er() {
        let mut s = BitStream::new(3);
        let tape = s.tape(kpc_from_bits_len(2, 1));
        let g = sample_kpc_from_bits(2, 1, &tape).unwrap();
        let er = tape.snapshot().unwrap();
        assert_eq!(g.edge(1, 2).unwrap(), er.get(0));
        assert!(g.tv_bound() > 0.0);
    }

    #[test]
    fn kpc_from_bits_plants_one_per_block() {
        let er = PackedBits::zeros(binom(6, 2));
        let perms = vec![ExplicitPerm::new(vec![2, 1, 3]).unwrap(), ExplicitPerm::new(vec![3, 2, 1]).unwrap()];
        let g = KpcFromBits::new(3, 2, er, perms).unwrap();
        assert_eq!(g.planted(), &[2, 6]);
        assert!(g.edge(2, 6).unwrap());
        assert!(!g.edge(1, 6).unwrap());
    }

    #[test]
    fn relabel_identity_and_collapse() {
        let mut s = BitStream::new(4);
        let er = crate::graph::sample_graph(&crate::graph::GraphParams::er(5), &mut s).unwrap().instance;
        let v = relabel(&er, ExplicitPerm::identity(5)).unwrap();
        for i in 1..=5 {
            for j in i + 1..=5 {
                assert_eq!(v.edge(i, j).unwrap(), er.edge(i, j).unwrap());
            }
        }
        let zeros = BitTape::explicit(PackedBits::zeros(default_perm_bits(5)), AccessPolicy::MultipleAccess);
        let v = relabel_kpc_to_pc(&er, &zeros).unwrap();
        assert!(!v.perm.covered());
        assert!(!v.edge(2, 3).unwrap());
        assert!(relabel(&er, ExplicitPerm::identity(4)).is_err());
    }
}
