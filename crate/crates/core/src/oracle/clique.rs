//! Exact maximum cliques and union bounds on their sizes.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::bits::{binom, binom_big};
use crate::error::{Error, Result};
use crate::graph::{GraphOracle, HypergraphOracle};

/// Largest instance accepted by the exact searches.
pub const MAX_EXACT_N: u32 = 40;

/// Bitset enumeration limit.
pub const MAX_BRUTE_N: u32 = 20;

/// A graph seen as a 2-uniform hypergraph.
pub struct AsHypergraph<G>(pub G);

impl<G: GraphOracle> HypergraphOracle for AsHypergraph<G> {
    fn vertex_count(&self) -> u32 {
        self.0.vertex_count()
    }
    fn uniformity(&self) -> u32 {
        2
    }
    fn hyperedge(&self, subset: &[u32]) -> Result<bool> {
        self.0.edge(subset[0], subset[1])
    }
}

/// Advances `idx` to the next increasing combination of `0..m`.
fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let r = idx.len();
    let mut i = r;
    while i > 0 {
        i -= 1;
        if idx[i] < m - r + i {
            idx[i] += 1;
            for j in i + 1..r {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Every `(s−1)`-subset of `clique` together with `v` is a hyperedge.
/// `clique` is increasing and all its elements are below `v`.
fn extends(h: &dyn HypergraphOracle, clique: &[u32], v: u32, buf: &mut Vec<u32>) -> Result<bool> {
    let r = h.uniformity() as usize - 1;
    if clique.len() < r {
        return Ok(true);
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        buf.clear();
        buf.extend(idx.iter().map(|&i| clique[i]));
        buf.push(v);
        if !h.hyperedge(buf)? {
            return Ok(false);
        }
        if !next_combination(&mut idx, clique.len()) {
            return Ok(true);
        }
    }
}

/// Maximum `t` such that some `t`-subset has all `C(t, s)` hyperedges.
/// Branch and bound over increasing vertex sequences.
pub fn max_clique_hypergraph(h: &dyn HypergraphOracle) -> Result<u32> {
    let n = h.vertex_count();
    let s = h.uniformity();
    if n > MAX_EXACT_N {
        return Err(Error::TooLarge(format!("n = {n} > {MAX_EXACT_N}")));
    }
    if s < 2 {
        return Err(Error::param("uniformity must be at least 2"));
    }
    let mut best = (s - 1).min(n);
    let mut clique = Vec::with_capacity(n as usize);
    let mut buf = Vec::with_capacity(s as usize);
    let cands: Vec<u32> = (1..=n).collect();
    grow(h, &mut clique, &cands, &mut best, &mut buf)?;
    Ok(best)
}

fn grow(
    h: &dyn HypergraphOracle,
    clique: &mut Vec<u32>,
    cands: &[u32],
    best: &mut u32,
    buf: &mut Vec<u32>,
) -> Result<()> {
    if clique.len() as u32 > *best {
        *best = clique.len() as u32;
    }
    for (i, &v) in cands.iter().enumerate() {
        if (clique.len() + cands.len() - i) as u32 <= *best {
            return Ok(());
        }
        clique.push(v);
        // candidates after v compatible with clique ∪ {v}
        let mut next = Vec::with_capacity(cands.len() - i);
        for &w in &cands[i + 1..] {
            if extends(h, clique, w, buf)? {
                next.push(w);
            }
        }
        grow(h, clique, &next, best, buf)?;
        clique.pop();
    }
    Ok(())
}

/// Same answer as [`max_clique_hypergraph`] by checking every vertex subset.
pub fn max_clique_bruteforce(h: &dyn HypergraphOracle) -> Result<u32> {
    let n = h.vertex_count();
    let s = h.uniformity() as usize;
    if n > MAX_BRUTE_N {
        return Err(Error::TooLarge(format!("n = {n} > {MAX_BRUTE_N}")));
    }
    let mut edges = Vec::new();
    let mut sub = vec![0u32; s];
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize == s {
            let mut t = 0;
            for v in 0..n {
                if mask >> v & 1 == 1 {
                    sub[t] = v + 1;
                    t += 1;
                }
            }
            if h.hyperedge(&sub)? {
                edges.push(mask);
            }
        }
    }
    let edge_set: std::collections::HashSet<u32> = edges.into_iter().collect();
    let mut best = 0;
    for mask in 0u32..(1u32 << n) {
        let size = mask.count_ones();
        if size <= best {
            continue;
        }
        let members: Vec<u32> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
        let mut ok = true;
        if members.len() >= s {
            let mut idx: Vec<usize> = (0..s).collect();
            loop {
                let m: u32 = idx.iter().map(|&i| 1u32 << members[i]).sum();
                if !edge_set.contains(&m) {
                    ok = false;
                    break;
                }
                if !next_combination(&mut idx, members.len()) {
                    break;
                }
            }
        }
        if ok {
            best = size;
        }
    }
    Ok(best)
}

/// `C(n, t) · 2^{−C(t, s)}`, bounding P(clique of size ≥ t) in `HER(n, s)`.
pub fn clique_union_bound(n: u64, t: u64, s: u64) -> BigRational {
    BigRational::new(BigInt::from(binom_big(n, t)), BigInt::from(1) << binom(t, s))
}

/// `ell^k · 2^{−C(k, 2)}`, bounding P(a k-clique with one vertex per block)
/// in an Erdős–Rényi graph on `k` blocks of `ell` vertices.
pub fn partite_union_bound(ell: u64, k: u64) -> BigRational {
    BigRational::new(BigInt::from(ell).pow(k as u32), BigInt::from(1) << binom(k, 2))
}
