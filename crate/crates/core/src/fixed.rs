//! Binary fixed point, exact truncation `[x]_t = 2^-t ⌊2^t x⌋`, discrete pmfs
//! on fixed-point supports, and inverse-CDF sampling from raw bits.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tape::{BitTape, WorkspaceMeter};

/// The value `raw / 2^t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedPoint {
    pub t: u32,
    pub raw: i128,
}

impl FixedPoint {
    pub fn new(raw: i128, t: u32) -> Self {
        FixedPoint { t, raw }
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.raw), BigInt::one() << self.t)
    }

    pub fn to_f64(self) -> f64 {
        self.raw as f64 / 2f64.powi(self.t as i32)
    }

    /// The same value at `t` fraction bits, truncating if `t` is coarser.
    pub fn at(self, t: u32) -> FixedPoint {
        if t >= self.t {
            FixedPoint { t, raw: self.raw << (t - self.t) }
        } else {
            // arithmetic shift is floor division by a power of two
            FixedPoint { t, raw: self.raw >> (self.t - t) }
        }
    }
}

impl PartialOrd for FixedPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FixedPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        let t = self.t.max(other.t);
        self.at(t).raw.cmp(&other.at(t).raw)
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.raw, self.t)
    }
}

/// `[x]_t` for an exact rational.
pub fn truncate(x: &BigRational, t: u32) -> FixedPoint {
    let scaled = x.numer() * (BigInt::one() << t);
    let raw = scaled.div_floor(x.denom());
    FixedPoint { t, raw: raw.to_i128().expect("truncated value exceeds i128") }
}

/// `[x]_t` for a fixed-point value.
pub fn truncate_fixed(x: FixedPoint, t: u32) -> FixedPoint {
    if t >= x.t {
        x
    } else {
        x.at(t)
    }
}

/// `⌊log₂(x) · 2^p⌋` for `x ≥ 1`, by repeated squaring of the mantissa.
pub fn log2_scaled(x: u64, p: u32) -> BigUint {
    assert!(x >= 1);
    let e = 63 - x.leading_zeros();
    let prec = p + 64;
    let one = BigUint::one() << prec;
    let two = &one << 1;
    // mantissa y = x / 2^e in [1, 2), scaled by 2^prec
    let mut y = (BigUint::from(x) << prec) >> e;
    let mut acc = BigUint::from(e) << p;
    for bit in (0..p).rev() {
        y = (&y * &y) >> prec;
        if y >= two {
            acc += BigUint::one() << bit;
            y >>= 1;
        }
    }
    acc
}

/// Smallest `t` with `2^t ≥ x^4`, i.e. `⌈4 log₂ x⌉`.
pub fn ceil_4log2(x: u64) -> u32 {
    let x4 = BigUint::from(x).pow(4);
    let mut t = 0u32;
    while (BigUint::one() << t) < x4 {
        t += 1;
    }
    t
}

/// `⌈log₂ √(6 log₂ L)⌉`: the smallest `a ≥ 0` with `L^6 ≤ 2^(4^a)`.
pub fn ceil_log2_sqrt_6log2(l: u64) -> u32 {
    let l6 = BigUint::from(l).pow(6);
    let mut a = 0u32;
    loop {
        let e = 4u64.pow(a);
        if l6.bits() <= e || l6 <= (BigUint::one() << e) {
            return a;
        }
        a += 1;
    }
}

/// `⌊√(6 log₂ L) · 2^w⌋`, up to an error of one unit in the last place from the
/// finite precision of the logarithm.
pub fn sqrt_6log2_raw(l: u64, w: u32) -> u128 {
    const P: u32 = 96;
    let lg = log2_scaled(l, P);
    let radicand = ((BigUint::from(6u32) * lg) << (2 * w)) >> P;
    radicand.sqrt().to_u128().expect("sqrt(6 log L) * 2^w exceeds u128")
}

/// One pmf entry as stored on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PmfEntry {
    pub value_raw: i64,
    pub value_t: u32,
    pub prob_raw: u128,
    pub prob_t: u32,
}

/// A finite distribution on fixed-point values at `w` bits with `tt`-bit
/// probabilities, support in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretePmf {
    w: u32,
    tt: u32,
    support: Vec<i128>,
    probs: Vec<u128>,
}

impl DiscretePmf {
    /// Builds a pmf, sorting by value. Probabilities must each be at most
    /// `2^tt` and sum to `2^tt` up to one unit per entry.
    pub fn new(w: u32, tt: u32, mut entries: Vec<(i128, u128)>) -> Result<Self> {
        if tt > 127 {
            return Err(Error::MalformedPmf(format!("{tt}-bit probabilities do not fit in u128")));
        }
        if entries.is_empty() {
            return Err(Error::MalformedPmf("empty support".into()));
        }
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|p| p[0].0 == p[1].0) {
            return Err(Error::MalformedPmf("repeated support value".into()));
        }
        let full = 1u128 << tt;
        let mut sum = 0u128;
        for &(_, p) in &entries {
            if p > full {
                return Err(Error::MalformedPmf(format!("probability {p} exceeds 2^{tt}")));
            }
            sum = sum.checked_add(p).ok_or_else(|| Error::MalformedPmf("probability sum overflows".into()))?;
        }
        if sum.abs_diff(full) > entries.len() as u128 {
            return Err(Error::MalformedPmf(format!("probabilities sum to {sum}/2^{tt}")));
        }
        let (support, probs) = entries.into_iter().unzip();
        Ok(DiscretePmf { w, tt, support, probs })
    }

    /// A point mass at `value`.
    pub fn point(value: FixedPoint, w: u32, tt: u32) -> Result<Self> {
        Self::new(w, tt, vec![(exact_at(value, w)?, 1u128 << tt)])
    }

    /// Converts stored entries to `w`-bit values and `tt`-bit probabilities.
    /// Values must be exactly representable at `w` bits; finer probabilities
    /// are truncated.
    pub fn from_entries(entries: &[PmfEntry], w: u32, tt: u32) -> Result<Self> {
        let mut out = Vec::with_capacity(entries.len());
        for e in entries {
            let v = exact_at(FixedPoint::new(e.value_raw.into(), e.value_t), w)?;
            let p = if e.prob_t <= tt {
                e.prob_raw
                    .checked_shl(tt - e.prob_t)
                    .filter(|s| s >> (tt - e.prob_t) == e.prob_raw)
                    .ok_or_else(|| Error::MalformedPmf("probability overflows".into()))?
            } else {
                e.prob_raw >> (e.prob_t - tt)
            };
            out.push((v, p));
        }
        Self::new(w, tt, out)
    }

    pub fn load_json(path: &Path, w: u32, tt: u32) -> Result<Self> {
        let entries: Vec<PmfEntry> = serde_json::from_slice(&std::fs::read(path)?)?;
        Self::from_entries(&entries, w, tt)
    }

    pub fn to_entries(&self) -> Vec<PmfEntry> {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(&v, &p)| PmfEntry { value_raw: v as i64, value_t: self.w, prob_raw: p, prob_t: self.tt })
            .collect()
    }

    pub fn value_bits(&self) -> u32 {
        self.w
    }

    pub fn prob_bits(&self) -> u32 {
        self.tt
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = FixedPoint> + '_ {
        self.support.iter().map(move |&r| FixedPoint::new(r, self.w))
    }

    pub fn prob(&self, idx: usize) -> BigRational {
        BigRational::new(BigInt::from(self.probs[idx]), BigInt::one() << self.tt)
    }

    pub fn max_abs_raw(&self) -> i128 {
        self.support.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// Errors if some support value exceeds `bound_raw / 2^w` in magnitude.
    pub fn check_window(&self, bound_raw: i128) -> Result<()> {
        match self.support.iter().find(|v| v.abs() > bound_raw) {
            Some(v) => Err(Error::MalformedPmf(format!("support value {v}/2^{} outside the window", self.w))),
            None => Ok(()),
        }
    }

    /// The first support value whose cumulative probability exceeds `u / 2^tt`;
    /// the last one if none does.
    pub fn inverse_cdf(&self, u: u128) -> FixedPoint {
        let mut cum = 0u128;
        for (v, p) in self.support.iter().zip(&self.probs) {
            cum += p;
            if cum > u {
                return FixedPoint::new(*v, self.w);
            }
        }
        FixedPoint::new(*self.support.last().unwrap(), self.w)
    }
}

fn exact_at(v: FixedPoint, w: u32) -> Result<i128> {
    let r = v.at(w);
    if r.at(v.t) != v {
        return Err(Error::MalformedPmf(format!("value {v} is not representable with {w} fraction bits")));
    }
    Ok(r.raw)
}

/// Reads `tt` bits at `offset`, most significant first, and returns the
/// inverse-CDF sample. The scan keeps the uniform value and one running sum.
pub fn inverse_cdf_sample(
    q: &DiscretePmf,
    bits: &BitTape,
    offset: u64,
    meter: Option<&WorkspaceMeter>,
) -> Result<FixedPoint> {
    let _u = meter.map(|m| m.charge("icdf.u", q.tt.into())).transpose()?;
    let _c = meter.map(|m| m.charge("icdf.cum", u64::from(q.tt) + 1)).transpose()?;
    let _i = meter.map(|m| m.counter("icdf.index", q.len() as u64)).transpose()?;
    let u = bits.read_uint(offset, q.tt)?;
    Ok(q.inverse_cdf(u))
}

/// A test pair on `{−1, −1/2, 0, 1/2, 1}`: `Q0` symmetric with weights
/// `(1, 2, 2, 2, 1)/8`, `Q1` tilted upward with weights `(1, 2, 4, 5, 4)/16`.
pub fn five_point_pair(w: u32, tt: u32) -> Result<(DiscretePmf, DiscretePmf)> {
    if w < 1 || tt < 4 {
        return Err(Error::MalformedPmf("five-point pair needs w >= 1 and tt >= 4".into()));
    }
    let half = 1i128 << (w - 1);
    let vals = [-2 * half, -half, 0, half, 2 * half];
    let unit = 1u128 << (tt - 4);
    let q0 = [2, 4, 4, 4, 2].map(|c| c * unit);
    let q1 = [1, 2, 4, 5, 4].map(|c| c * unit);
    let a = DiscretePmf::new(w, tt, vals.iter().copied().zip(q0).collect())?;
    let b = DiscretePmf::new(w, tt, vals.iter().copied().zip(q1).collect())?;
    Ok((a, b))
}

/// The exact mixture `(1/2) a + (1/2) b` as rationals keyed by value.
pub fn half_mixture(a: &DiscretePmf, b: &DiscretePmf) -> Vec<(FixedPoint, BigRational)> {
    let half = BigRational::new(1.into(), 2.into());
    let mut out: Vec<(FixedPoint, BigRational)> = Vec::new();
    for pmf in [a, b] {
        for (i, v) in pmf.support().enumerate() {
            let p = pmf.prob(i) * &half;
            match out.iter_mut().find(|(x, _)| *x == v) {
                Some((_, acc)) => *acc += p,
                None => out.push((v, p)),
            }
        }
    }
    out.sort_by_key(|x| x.0);
    out.retain(|(_, p)| !p.is_zero());
    out
}
