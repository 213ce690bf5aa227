//! Exact output distributions of samplers at tiny scale.
//!
//! A sampler written against [`RandomSource`] is replayed once per path of
//! choices: each `below(n)` is an `n`-way branch of weight `1/n` and each
//! `bit()` a two-way branch. Paths are visited depth first with an odometer,
//! so memory stays proportional to one path.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bits::PackedBits;
use crate::error::{Error, Result};
use crate::tape::RandomSource;

/// Default leaf limit, `2^24`.
pub const DEFAULT_LEAF_LIMIT: u64 = 1 << 24;

/// Outcomes that know the shape of their space.
pub trait Outcome: Ord + Clone + std::hash::Hash {
    fn shape(&self) -> Vec<u64>;
}

impl Outcome for PackedBits {
    fn shape(&self) -> Vec<u64> {
        vec![self.len()]
    }
}

impl Outcome for Vec<u32> {
    fn shape(&self) -> Vec<u64> {
        vec![self.len() as u64]
    }
}

impl Outcome for bool {
    fn shape(&self) -> Vec<u64> {
        Vec::new()
    }
}

impl Outcome for u32 {
    fn shape(&self) -> Vec<u64> {
        Vec::new()
    }
}

impl<A: Outcome, B: Outcome> Outcome for (A, B) {
    fn shape(&self) -> Vec<u64> {
        let mut s = self.0.shape();
        s.push(u64::MAX);
        s.extend(self.1.shape());
        s
    }
}

/// A finite distribution with exact rational probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDistribution<O: Outcome> {
    probs: BTreeMap<O, BigRational>,
}

impl<O: Outcome> ExactDistribution<O> {
    pub fn from_map(probs: BTreeMap<O, BigRational>) -> Self {
        let probs = probs.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        ExactDistribution { probs }
    }

    pub fn point(o: O) -> Self {
        Self::from_map(BTreeMap::from([(o, BigRational::one())]))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> BigRational {
        self.probs.values().fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn prob(&self, o: &O) -> BigRational {
        self.probs.get(o).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&O, &BigRational)> {
        self.probs.iter()
    }

    /// Probability of an event.
    pub fn prob_of(&self, pred: impl Fn(&O) -> bool) -> BigRational {
        self.probs.iter().filter(|(o, _)| pred(o)).fold(BigRational::zero(), |a, (_, p)| a + p)
    }

    /// The distribution conditioned on `pred`, and the event's probability.
    pub fn condition(&self, pred: impl Fn(&O) -> bool) -> Result<(Self, BigRational)> {
        let p = self.prob_of(&pred);
        if p.is_zero() {
            return Err(Error::param("conditioning on a null event"));
        }
        let probs = self.probs.iter().filter(|(o, _)| pred(o)).map(|(o, q)| (o.clone(), q / &p)).collect();
        Ok((ExactDistribution { probs }, p))
    }

    /// Push-forward through `f`.
    pub fn map<P: Outcome>(&self, f: impl Fn(&O) -> P) -> ExactDistribution<P> {
        let mut probs: BTreeMap<P, BigRational> = BTreeMap::new();
        for (o, p) in &self.probs {
            *probs.entry(f(o)).or_insert_with(BigRational::zero) += p;
        }
        ExactDistribution::from_map(probs)
    }

    /// The product with an independent distribution.
    pub fn product<P: Outcome>(&self, other: &ExactDistribution<P>) -> ExactDistribution<(O, P)> {
        let mut probs = BTreeMap::new();
        for (a, pa) in &self.probs {
            for (b, pb) in &other.probs {
                probs.insert((a.clone(), b.clone()), pa * pb);
            }
        }
        ExactDistribution { probs }
    }

    fn shape(&self) -> Option<Vec<u64>> {
        self.probs.keys().next().map(Outcome::shape)
    }
}

/// Uniform distribution on `{0,1}^len`.
pub fn uniform_bits(len: u64) -> Result<ExactDistribution<PackedBits>> {
    if len > 24 {
        return Err(Error::BudgetTooLarge { leaves: 1u128 << len, limit: DEFAULT_LEAF_LIMIT.into() });
    }
    let p = BigRational::new(BigInt::one(), BigInt::one() << len);
    let probs = (0..1u64 << len)
        .map(|v| {
            let mut b = PackedBits::zeros(len);
            for i in 0..len {
                b.set(i, (v >> i) & 1 == 1);
            }
            (b, p.clone())
        })
        .collect();
    Ok(ExactDistribution { probs })
}

/// `(1/2) Σ |a(o) − b(o)|`.
pub fn tv_distance<O: Outcome>(a: &ExactDistribution<O>, b: &ExactDistribution<O>) -> Result<BigRational> {
    let shapes: Vec<Vec<u64>> = a.probs.keys().chain(b.probs.keys()).map(Outcome::shape).collect();
    if let (Some(first), Some(other)) =
        (a.shape().or(b.shape()), shapes.iter().find(|s| Some(*s) != a.shape().as_ref()))
    {
        if *other != first {
            return Err(Error::MismatchedSpaces(format!("outcome shapes {first:?} and {other:?}")));
        }
    }
    let mut acc = BigRational::zero();
    for (o, p) in &a.probs {
        acc += (p - b.prob(o)).abs();
    }
    for (o, q) in &b.probs {
        if !a.probs.contains_key(o) {
            acc += q;
        }
    }
    Ok(acc / BigRational::from_integer(2.into()))
}

struct PathSource {
    // (choice, arity) per draw
    path: Vec<(u64, u64)>,
    pos: usize,
}

impl RandomSource for PathSource {
    fn bit(&mut self) -> bool {
        self.below(2) == 1
    }

    fn below(&mut self, n: u64) -> u64 {
        assert!(n >= 1, "below(0)");
        if self.pos < self.path.len() {
            let (c, a) = self.path[self.pos];
            assert_eq!(a, n, "sampler is not deterministic given its draws");
            self.pos += 1;
            c
        } else {
            self.path.push((0, n));
            self.pos += 1;
            0
        }
    }
}

impl PathSource {
    /// Moves to the next path; false when all have been visited.
    fn advance(&mut self) -> bool {
        while let Some(&(c, a)) = self.path.last() {
            if c + 1 < a {
                self.path.last_mut().unwrap().0 += 1;
                self.pos = 0;
                return true;
            }
            self.path.pop();
        }
        false
    }
}

/// Runs `sampler` on every path of choices and returns its exact output
/// distribution. Errors with [`Error::BudgetTooLarge`] past `leaf_limit` paths.
pub fn enumerate_sampler<O: Outcome>(
    leaf_limit: u64,
    mut sampler: impl FnMut(&mut dyn RandomSource) -> Result<O>,
) -> Result<ExactDistribution<O>> {
    // weights are 1/denominator; group counts by denominator and add once
    let mut counts: HashMap<O, HashMap<u128, u64>> = HashMap::new();
    let mut src = PathSource { path: Vec::new(), pos: 0 };
    let mut leaves = 0u64;
    loop {
        src.pos = 0;
        let out = sampler(&mut src)?;
        if src.pos != src.path.len() {
            return Err(Error::param("sampler is not deterministic given its draws"));
        }
        leaves += 1;
        if leaves > leaf_limit {
            return Err(Error::BudgetTooLarge { leaves: u128::from(leaves), limit: leaf_limit.into() });
        }
        let den = src
            .path
            .iter()
            .try_fold(1u128, |acc, &(_, a)| acc.checked_mul(u128::from(a)))
            .ok_or_else(|| Error::param("path weight underflows u128"))?;
        *counts.entry(out).or_default().entry(den).or_default() += 1;
        if !src.advance() {
            break;
        }
    }
    let mut probs = BTreeMap::new();
    for (o, by_den) in counts {
        let mut p = BigRational::zero();
        for (den, c) in by_den {
            p += BigRational::new(BigInt::from(c), BigInt::from(BigUint::from(den)));
        }
        probs.insert(o, p);
    }
    Ok(ExactDistribution { probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_graph, GraphParams};

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn er3_has_eight_equal_outcomes() {
        let d = enumerate_sampler(DEFAULT_LEAF_LIMIT, |rng| {
            Ok(sample_graph(&GraphParams::er(3), rng)?.instance.edges().clone())
        })
        .unwrap();
        assert_eq!(d.len(), 8);
        assert!(d.iter().all(|(_, p)| *p == q(1, 8)));
        assert_eq!(d.total(), q(1, 1));
        assert_eq!(tv_distance(&d, &uniform_bits(3).unwrap()).unwrap(), q(0, 1));
    }

    #[test]
    fn mixed_arities() {
        // below(3), then a bit only on the first branch
        let d = enumerate_sampler(100, |rng| {
            let a = rng.below(3) as u32;
            Ok(if a == 0 { 10 + u32::from(rng.bit()) } else { a })
        })
        .unwrap();
        assert_eq!(d.prob(&10), q(1, 6));
        assert_eq!(d.prob(&11), q(1, 6));
        assert_eq!(d.prob(&2), q(1, 3));
        assert_eq!(d.total(), q(1, 1));
    }

    #[test]
    fn budget_and_spaces() {
        let r = enumerate_sampler(10, |rng| Ok(PackedBits::from_bools(&[rng.bit(), rng.bit(), rng.bit(), rng.bit()])));
        assert!(matches!(r, Err(Error::BudgetTooLarge { .. })));
        let a = uniform_bits(2).unwrap();
        let b = uniform_bits(3).unwrap();
        assert!(matches!(tv_distance(&a, &b), Err(Error::MismatchedSpaces(_))));
        let p0 = ExactDistribution::point(PackedBits::from_bools(&[false]));
        let p1 = ExactDistribution::point(PackedBits::from_bools(&[true]));
        assert_eq!(tv_distance(&p0, &p1).unwrap(), q(1, 1));
        assert_eq!(tv_distance(&p0, &p0).unwrap(), q(0, 1));
    }

    #[test]
    fn condition_and_product() {
        let u = uniform_bits(2).unwrap();
        let (c, p) = u.condition(|b| b.get(0)).unwrap();
        assert_eq!(p, q(1, 2));
        assert_eq!(c.len(), 2);
        let prod = c.product(&uniform_bits(1).unwrap());
        assert_eq!(prod.len(), 4);
        assert_eq!(prod.total(), q(1, 1));
        assert!(u.condition(|_| false).is_err());
    }
}
