//! Detection from a recovery oracle for the clique-leakage problems.
//!
//! The hypergraph version tries every increasing `(s−2)`-tuple `t` as the
//! leaked vertices: it renames `[s−2]` onto `t` (other vertices keep their
//! order on the complement), asks the oracle for each vertex of the renamed
//! hypergraph, and accepts if at least `k` vertices are flagged and every
//! flagged `s`-subset is a hyperedge. The k-partite version tries each
//! `i ∈ [ell]` as the leaked vertex by swapping vertices 1 and `i`, and
//! accepts if the flagged set is a k-partite `k`-clique.
//!
//! Neither version stores the flagged set: membership is re-queried.

use crate::bits::bits_for;
use crate::error::{Error, Result};
use crate::graph::{check_pair, check_subset, next_colex, GraphOracle, HypergraphOracle};
use crate::tape::WorkspaceMeter;

/// `rename_t(x)`: `x ≤ s−2` maps to `t_x`, larger `x` to the
/// `(x−(s−2))`-th smallest positive integer outside `t`.
pub fn rename(tuple: &[u32], x: u32) -> u32 {
    let lead = tuple.len() as u32;
    if x <= lead {
        return tuple[x as usize - 1];
    }
    let mut ans = x - lead;
    for &v in tuple {
        if v <= ans {
            ans += 1;
        }
    }
    ans
}

/// A hypergraph seen through `rename_t`.
pub struct RenamedHypergraph<'a> {
    src: &'a dyn HypergraphOracle,
    tuple: Vec<u32>,
}

impl RenamedHypergraph<'_> {
    pub fn tuple(&self) -> &[u32] {
        &self.tuple
    }

    /// The source vertex behind view vertex `x`.
    pub fn original(&self, x: u32) -> u32 {
        rename(&self.tuple, x)
    }
}

impl HypergraphOracle for RenamedHypergraph<'_> {
    fn vertex_count(&self) -> u32 {
        self.src.vertex_count()
    }

    fn uniformity(&self) -> u32 {
        self.src.uniformity()
    }

    fn hyperedge(&self, subset: &[u32]) -> Result<bool> {
        check_subset(subset, self.uniformity(), self.vertex_count())?;
        let mut mapped: Vec<u32> = subset.iter().map(|&x| self.original(x)).collect();
        mapped.sort_unstable();
        self.src.hyperedge(&mapped)
    }
}

/// A graph with vertices 1 and `i` swapped.
pub struct SwappedGraph<'a> {
    src: &'a dyn GraphOracle,
    i: u32,
}

impl SwappedGraph<'_> {
    pub fn swapped_with(&self) -> u32 {
        self.i
    }

    pub fn original(&self, x: u32) -> u32 {
        if x == 1 {
            self.i
        } else if x == self.i {
            1
        } else {
            x
        }
    }
}

impl GraphOracle for SwappedGraph<'_> {
    fn vertex_count(&self) -> u32 {
        self.src.vertex_count()
    }

    fn edge(&self, a: u32, b: u32) -> Result<bool> {
        check_pair(a, b, self.vertex_count())?;
        self.src.edge(self.original(a), self.original(b))
    }
}

/// A deterministic clique-recovery algorithm: says whether a vertex of the
/// (renamed) input belongs to the planted clique.
pub trait RecoveryOracle {
    fn in_hyper_clique(&self, _view: &RenamedHypergraph<'_>, _v: u32) -> Result<bool> {
        Ok(false)
    }

    fn in_graph_clique(&self, _view: &SwappedGraph<'_>, _v: u32) -> Result<bool> {
        Ok(false)
    }
}

/// Flags nothing.
pub struct ZeroOracle;

impl RecoveryOracle for ZeroOracle {}

/// Reads the hidden planted set. Answers truthfully when the leaked vertices
/// of the view really are planted, and flags nothing otherwise.
pub struct LeakageCheatingOracle {
    planted: Vec<u32>,
}

impl LeakageCheatingOracle {
    pub fn new(planted: Option<&[u32]>) -> Self {
        let mut planted = planted.map(<[u32]>::to_vec).unwrap_or_default();
        planted.sort_unstable();
        LeakageCheatingOracle { planted }
    }

    fn has(&self, v: u32) -> bool {
        self.planted.binary_search(&v).is_ok()
    }
}

impl RecoveryOracle for LeakageCheatingOracle {
    fn in_hyper_clique(&self, view: &RenamedHypergraph<'_>, v: u32) -> Result<bool> {
        Ok(view.tuple().iter().all(|&t| self.has(t)) && self.has(view.original(v)))
    }

    fn in_graph_clique(&self, view: &SwappedGraph<'_>, v: u32) -> Result<bool> {
        Ok(self.has(view.original(1)) && self.has(view.original(v)))
    }
}

/// Grows a clique greedily from the leaked vertices in index order and flags
/// its members. An honest (weak) recovery algorithm for null-side tests.
pub struct GreedyOracle;

impl GreedyOracle {
    fn hyper_clique(view: &RenamedHypergraph<'_>) -> Result<Vec<u32>> {
        let s = view.uniformity();
        let mut clique: Vec<u32> = (1..=s - 2).collect();
        for v in s - 1..=view.vertex_count() {
            let mut ok = true;
            // every (s−1)-subset of the clique together with v
            let mut pick: Vec<u32> = (1..=s - 1).collect();
            if clique.len() as u32 >= s - 1 {
                loop {
                    let mut e: Vec<u32> = pick.iter().map(|&p| clique[p as usize - 1]).collect();
                    e.push(v);
                    if !view.hyperedge(&e)? {
                        ok = false;
                        break;
                    }
                    if !next_colex(&mut pick, clique.len() as u32) {
                        break;
                    }
                }
            }
            if ok {
                clique.push(v);
            }
        }
        Ok(clique)
    }

    fn graph_clique(view: &SwappedGraph<'_>) -> Result<Vec<u32>> {
        let mut clique = vec![1u32];
        for v in 2..=view.vertex_count() {
            let mut ok = true;
            for &c in &clique {
                if !view.edge(c, v)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                clique.push(v);
            }
        }
        Ok(clique)
    }
}

impl RecoveryOracle for GreedyOracle {
    fn in_hyper_clique(&self, view: &RenamedHypergraph<'_>, v: u32) -> Result<bool> {
        Ok(Self::hyper_clique(view)?.contains(&v))
    }

    fn in_graph_clique(&self, view: &SwappedGraph<'_>, v: u32) -> Result<bool> {
        Ok(Self::graph_clique(view)?.contains(&v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detection {
    pub accept: bool,
    /// The leaked tuple (or `[i]`) that led to acceptance.
    pub witness: Option<Vec<u32>>,
    pub oracle_calls: u64,
}

/// Advances `t` to the next tuple of `[n]^len` in lexicographic order.
fn next_tuple(t: &mut [u32], n: u32) -> bool {
    for pos in (0..t.len()).rev() {
        if t[pos] < n {
            t[pos] += 1;
            for x in &mut t[pos + 1..] {
                *x = 1;
            }
            return true;
        }
    }
    false
}

pub fn detect_via_recovery_hpc(
    input: &dyn HypergraphOracle,
    k: u32,
    oracle: &dyn RecoveryOracle,
    meter: Option<&WorkspaceMeter>,
) -> Result<Detection> {
    let n = input.vertex_count();
    let s = input.uniformity();
    if s < 3 || n < s {
        return Err(Error::param(format!("need 3 <= s <= n, got s = {s}, n = {n}")));
    }
    let nb = u64::from(n);
    let lead = (s - 2) as usize;
    let _tuple = meter.map(|m| m.charge("detect.tuple", lead as u64 * bits_for(nb))).transpose()?;
    let _v = meter.map(|m| m.counter("detect.vertex", nb)).transpose()?;
    let _count = meter.map(|m| m.counter("detect.flagged", nb)).transpose()?;
    let _subset = meter.map(|m| m.charge("detect.subset", u64::from(s) * bits_for(nb))).transpose()?;
    let _rename = meter.map(|m| m.counter("detect.rename", nb)).transpose()?;
    let mut calls = 0u64;
    let mut tuple = vec![1u32; lead];
    loop {
        if tuple.windows(2).all(|w| w[0] < w[1]) {
            let view = RenamedHypergraph { src: input, tuple: tuple.clone() };
            let mut flagged = 0u32;
            for v in 1..=n {
                calls += 1;
                if oracle.in_hyper_clique(&view, v)? {
                    flagged += 1;
                }
            }
            if flagged >= k && flagged >= s {
                let mut subset: Vec<u32> = (1..=s).collect();
                let mut all = true;
                loop {
                    let mut inside = true;
                    for &x in &subset {
                        calls += 1;
                        if !oracle.in_hyper_clique(&view, x)? {
                            inside = false;
                            break;
                        }
                    }
                    if inside && !view.hyperedge(&subset)? {
                        all = false;
                        break;
                    }
                    if !next_colex(&mut subset, n) {
                        break;
                    }
                }
                if all {
                    return Ok(Detection { accept: true, witness: Some(tuple), oracle_calls: calls });
                }
            } else if flagged >= k {
                // fewer than s flagged vertices: no s-subset to check
                return Ok(Detection { accept: true, witness: Some(tuple), oracle_calls: calls });
            }
        }
        if !next_tuple(&mut tuple, n) {
            break;
        }
    }
    Ok(Detection { accept: false, witness: None, oracle_calls: calls })
}

pub fn detect_via_recovery_kpc(
    input: &dyn GraphOracle,
    ell: u32,
    k: u32,
    oracle: &dyn RecoveryOracle,
    meter: Option<&WorkspaceMeter>,
) -> Result<Detection> {
    let n = input.vertex_count();
    if ell == 0 || n != ell * k {
        return Err(Error::param(format!("graph has {n} vertices, expected ell*k = {}", ell * k)));
    }
    let nb = u64::from(n);
    let _i = meter.map(|m| m.counter("detect.leak", ell.into())).transpose()?;
    let _b = meter.map(|m| m.counter("detect.block", k.into())).transpose()?;
    let _v = meter.map(|m| m.counter("detect.vertex", nb)).transpose()?;
    let _u = meter.map(|m| m.counter("detect.partner", nb)).transpose()?;
    let _c = meter.map(|m| m.counter("detect.flagged", nb)).transpose()?;
    let mut calls = 0u64;
    'leak: for i in 1..=ell {
        let view = SwappedGraph { src: input, i };
        // exactly one flagged vertex per block
        for b in 0..k {
            let mut in_block = 0;
            for v in b * ell + 1..=(b + 1) * ell {
                calls += 1;
                if oracle.in_graph_clique(&view, v)? {
                    in_block += 1;
                }
            }
            if in_block != 1 {
                continue 'leak;
            }
        }
        for v in 2..=n {
            calls += 1;
            if !oracle.in_graph_clique(&view, v)? {
                continue;
            }
            for u in 1..v {
                calls += 1;
                if oracle.in_graph_clique(&view, u)? && !view.edge(u, v)? {
                    continue 'leak;
                }
            }
        }
        return Ok(Detection { accept: true, witness: Some(vec![i]), oracle_calls: calls });
    }
    Ok(Detection { accept: false, witness: None, oracle_calls: calls })
}
