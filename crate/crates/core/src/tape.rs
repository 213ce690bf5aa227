//! The instrumented access model.
//!
//! Every reduction consumes randomness through a [`BitTape`], which enforces
//! either multiple-access or read-once semantics and counts reads. Working
//! memory is accounted cooperatively on a [`WorkspaceMeter`]: an operation
//! charges each register it keeps alive and the meter tracks the peak.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::bits::{bits_for, ceil_log2, PackedBits};
use crate::error::{Error, Result};

/// Default constant `c` in the workspace limit `c * ⌈log₂ N⌉`.
pub const DEFAULT_WORKSPACE_CONSTANT: u64 = 16;

/// Something that can answer "what is bit `pos`?" for every `pos < len()`.
pub trait BitOracle: Send + Sync {
    fn len(&self) -> u64;
    fn bit(&self, pos: u64) -> Result<bool>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl BitOracle for PackedBits {
    fn len(&self) -> u64 {
        PackedBits::len(self)
    }

    fn bit(&self, pos: u64) -> Result<bool> {
        if pos >= PackedBits::len(self) {
            return Err(Error::OutOfBounds { pos, len: PackedBits::len(self) });
        }
        Ok(self.get(pos))
    }
}

/// Adapts a closure into a [`BitOracle`].
pub struct FnOracle<F> {
    len: u64,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(u64) -> Result<bool> + Send + Sync,
{
    pub fn new(len: u64, f: F) -> Self {
        FnOracle { len, f }
    }
}

impl<F> BitOracle for FnOracle<F>
where
    F: Fn(u64) -> Result<bool> + Send + Sync,
{
    fn len(&self) -> u64 {
        self.len
    }

    fn bit(&self, pos: u64) -> Result<bool> {
        (self.f)(pos)
    }
}

struct SliceOracle {
    inner: Arc<dyn BitOracle>,
    offset: u64,
    len: u64,
}

impl BitOracle for SliceOracle {
    fn len(&self) -> u64 {
        self.len
    }

    fn bit(&self, pos: u64) -> Result<bool> {
        if pos >= self.len {
            return Err(Error::OutOfBounds { pos, len: self.len });
        }
        self.inner.bit(self.offset + pos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AccessPolicy {
    MultipleAccess,
    ReadOnce,
}

#[derive(Clone)]
pub enum TapeSource {
    Explicit(Arc<PackedBits>),
    Derived(Arc<dyn BitOracle>),
}

impl TapeSource {
    fn as_oracle(&self) -> &dyn BitOracle {
        match self {
            TapeSource::Explicit(bits) => bits.as_ref(),
            TapeSource::Derived(oracle) => oracle.as_ref(),
        }
    }

    fn to_arc(&self) -> Arc<dyn BitOracle> {
        match self {
            TapeSource::Explicit(bits) => bits.clone(),
            TapeSource::Derived(oracle) => oracle.clone(),
        }
    }
}

/// A bit sequence with an access policy and read counters.
///
/// Counters are atomics so a multiple-access tape can be read through a shared
/// reference; a read-once tape still has a single logical owner.
pub struct BitTape {
    length: u64,
    policy: AccessPolicy,
    head: AtomicU64,
    reads: AtomicU64,
    // one past the largest position ever read
    high_water: AtomicU64,
    source: TapeSource,
}

impl fmt::Debug for BitTape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BitTape")
            .field("length", &self.length)
            .field("policy", &self.policy)
            .field("head", &self.head())
            .field("reads", &self.reads())
            .finish()
    }
}

impl BitTape {
    pub fn explicit(bits: PackedBits, policy: AccessPolicy) -> Self {
        let length = bits.len();
        Self::with_source(TapeSource::Explicit(Arc::new(bits)), length, policy)
    }

    pub fn from_bools(bits: &[bool], policy: AccessPolicy) -> Self {
        Self::explicit(PackedBits::from_bools(bits), policy)
    }

    /// A tape whose bits are computed on demand by another oracle.
    pub fn derived(oracle: Arc<dyn BitOracle>, length: u64, policy: AccessPolicy) -> Result<Self> {
        if length > oracle.len() {
            return Err(Error::InsufficientRandomness { needed: length, available: oracle.len() });
        }
        Ok(Self::with_source(TapeSource::Derived(oracle), length, policy))
    }

    fn with_source(source: TapeSource, length: u64, policy: AccessPolicy) -> Self {
        BitTape {
            length,
            policy,
            head: AtomicU64::new(0),
            reads: AtomicU64::new(0),
            high_water: AtomicU64::new(0),
            source,
        }
    }

    pub fn len(&self) -> u64 {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn policy(&self) -> AccessPolicy {
        self.policy
    }

    pub fn head(&self) -> u64 {
        self.head.load(Ordering::Acquire)
    }

    pub fn reads(&self) -> u64 {
        self.reads.load(Ordering::Acquire)
    }

    /// One past the largest position successfully read so far.
    pub fn consumed(&self) -> u64 {
        self.high_water.load(Ordering::Acquire)
    }

    pub fn is_derived(&self) -> bool {
        matches!(self.source, TapeSource::Derived(_))
    }

    pub fn read(&self, pos: u64) -> Result<bool> {
        if pos >= self.length {
            return Err(Error::OutOfBounds { pos, len: self.length });
        }
        if self.policy == AccessPolicy::ReadOnce {
            let head = self.head();
            if pos != head {
                return Err(Error::ReadOncePolicyViolation { pos, head });
            }
        }
        let bit = self.source.as_oracle().bit(pos)?;
        if self.policy == AccessPolicy::ReadOnce {
            self.head.store(pos + 1, Ordering::Release);
        }
        self.reads.fetch_add(1, Ordering::AcqRel);
        self.high_water.fetch_max(pos + 1, Ordering::AcqRel);
        Ok(bit)
    }

    /// Reads `width` consecutive bits starting at `pos`, most significant first.
    pub fn read_uint(&self, pos: u64, width: u32) -> Result<u128> {
        debug_assert!(width <= 128);
        let mut v = 0u128;
        for t in 0..u64::from(width) {
            v = (v << 1) | u128::from(self.read(pos + t)?);
        }
        Ok(v)
    }

    /// A fresh tape over `[offset, offset + len)` of this tape's source, with
    /// its own counters.
    pub fn slice(&self, offset: u64, len: u64, policy: AccessPolicy) -> Result<BitTape> {
        let end = offset.checked_add(len).ok_or_else(|| Error::param("slice overflows"))?;
        if end > self.length {
            return Err(Error::InsufficientRandomness { needed: end, available: self.length });
        }
        let oracle = SliceOracle { inner: self.source.to_arc(), offset, len };
        BitTape::derived(Arc::new(oracle), len, policy)
    }

    /// Copies the tape's bits into an explicit array. Does not touch the counters.
    pub fn snapshot(&self) -> Result<PackedBits> {
        let oracle = self.source.as_oracle();
        let mut out = PackedBits::zeros(self.length);
        for i in 0..self.length {
            out.set(i, oracle.bit(i)?);
        }
        Ok(out)
    }
}

impl BitOracle for BitTape {
    fn len(&self) -> u64 {
        self.length
    }

    fn bit(&self, pos: u64) -> Result<bool> {
        self.read(pos)
    }
}

/// Builds a derived tape from an oracle.
pub fn derive_tape(oracle: Arc<dyn BitOracle>, length: u64, policy: AccessPolicy) -> Result<BitTape> {
    BitTape::derived(oracle, length, policy)
}

#[derive(Debug, Default)]
struct MeterState {
    next_id: u64,
    live: u64,
    peak: u64,
    charges: Vec<(u64, String, u64)>,
    peak_charges: Vec<(String, u64)>,
    violations: Vec<String>,
}

/// Cooperative accounting of working memory in bits.
#[derive(Debug)]
pub struct WorkspaceMeter {
    limit: u64,
    constant: u64,
    input_bits: u64,
    strict: bool,
    state: Mutex<MeterState>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeterReport {
    pub limit: u64,
    pub constant: u64,
    pub input_bits: u64,
    pub peak: u64,
    pub strict: bool,
    pub peak_charges: Vec<(String, u64)>,
    pub violations: Vec<String>,
}

impl WorkspaceMeter {
    /// Limit `c * ⌈log₂ input_bits⌉`.
    pub fn for_input(input_bits: u64, constant: u64, strict: bool) -> Self {
        let limit = constant * u64::from(ceil_log2(input_bits.max(2)));
        WorkspaceMeter { limit, constant, input_bits, strict, state: Mutex::default() }
    }

    pub fn with_limit(limit: u64, strict: bool) -> Self {
        WorkspaceMeter { limit, constant: 0, input_bits: 0, strict, state: Mutex::default() }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn constant(&self) -> u64 {
        self.constant
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn peak(&self) -> u64 {
        self.state.lock().unwrap().peak
    }

    pub fn live(&self) -> u64 {
        self.state.lock().unwrap().live
    }

    pub fn violations(&self) -> Vec<String> {
        self.state.lock().unwrap().violations.clone()
    }

    pub fn charge(&self, label: &str, bits: u64) -> Result<Charge<'_>> {
        let mut st = self.state.lock().unwrap();
        let live = st.live + bits;
        if live > self.limit {
            let msg = format!("{label}: {live} > {}", self.limit);
            if self.strict {
                return Err(Error::LimitExceeded { label: label.to_string(), live, limit: self.limit });
            }
            if st.violations.len() < 64 {
                st.violations.push(msg);
            }
        }
        let id = st.next_id;
        st.next_id += 1;
        st.live = live;
        st.charges.push((id, label.to_string(), bits));
        if live > st.peak {
            st.peak = live;
            st.peak_charges = st.charges.iter().map(|(_, l, b)| (l.clone(), *b)).collect();
        }
        Ok(Charge { meter: self, id, bits })
    }

    /// Charges a counter that must hold every value in `0..=max`.
    pub fn counter(&self, label: &str, max: u64) -> Result<Charge<'_>> {
        self.charge(label, bits_for(max))
    }

    fn release_id(&self, id: u64, bits: u64) {
        let mut st = self.state.lock().unwrap();
        if let Some(pos) = st.charges.iter().rposition(|(cid, _, _)| *cid == id) {
            st.charges.remove(pos);
            st.live -= bits;
        }
    }

    pub fn report(&self) -> MeterReport {
        let st = self.state.lock().unwrap();
        MeterReport {
            limit: self.limit,
            constant: self.constant,
            input_bits: self.input_bits,
            peak: st.peak,
            strict: self.strict,
            peak_charges: st.peak_charges.clone(),
            violations: st.violations.clone(),
        }
    }
}

/// A live charge; released on drop or via [`Charge::release`].
#[must_use = "a charge is released as soon as it is dropped"]
pub struct Charge<'m> {
    meter: &'m WorkspaceMeter,
    id: u64,
    bits: u64,
}

impl Charge<'_> {
    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn release(self) {}
}

impl Drop for Charge<'_> {
    fn drop(&mut self) {
        self.meter.release_id(self.id, self.bits);
    }
}

/// Source of fair bits and exactly uniform small integers.
///
/// Samplers are written against this trait so the same code runs on a seeded
/// stream and under the exhaustive enumerator in [`crate::oracle`].
pub trait RandomSource {
    fn bit(&mut self) -> bool;

    /// Uniform value in `0..n`, `n ≥ 1`.
    fn below(&mut self, n: u64) -> u64;
}

pub const STREAM_GENERATOR_ID: &str = "chacha8/rand_chacha-0.3/u32-lsb";

/// Counter-based deterministic bit stream: bit `c` of the stream keyed by
/// `seed` is bit `c % 32` of ChaCha8 output word `c / 32`.
#[derive(Clone)]
pub struct BitStream {
    seed: u64,
    counter: u64,
    rng: ChaCha8Rng,
    word: u32,
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BitStream").field("seed", &self.seed).field("counter", &self.counter).finish()
    }
}

impl BitStream {
    pub fn new(seed: u64) -> Self {
        BitStream { seed, counter: 0, rng: ChaCha8Rng::seed_from_u64(seed), word: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn generator_id(&self) -> &'static str {
        STREAM_GENERATOR_ID
    }

    /// Random access into the stream without disturbing this cursor.
    pub fn bit_at(seed: u64, counter: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(u128::from(counter / 32));
        (rng.next_u32() >> (counter % 32)) & 1 == 1
    }

    pub fn next_bit(&mut self) -> bool {
        if self.counter.is_multiple_of(32) {
            self.word = self.rng.next_u32();
        }
        let b = (self.word >> (self.counter % 32)) & 1 == 1;
        self.counter += 1;
        b
    }

    /// Next `width ≤ 64` bits, most significant first.
    pub fn next_bits(&mut self, width: u32) -> u64 {
        (0..width).fold(0u64, |acc, _| (acc << 1) | u64::from(self.next_bit()))
    }

    pub fn take_bits(&mut self, len: u64) -> PackedBits {
        let mut out = PackedBits::zeros(len);
        for i in 0..len {
            out.set(i, self.next_bit());
        }
        out
    }

    /// A multiple-access tape of `len` fresh stream bits.
    pub fn tape(&mut self, len: u64) -> BitTape {
        BitTape::explicit(self.take_bits(len), AccessPolicy::MultipleAccess)
    }
}

impl RandomSource for BitStream {
    fn bit(&mut self) -> bool {
        self.next_bit()
    }

    /// Rejection sampling on `⌈log₂ n⌉`-bit draws.
    fn below(&mut self, n: u64) -> u64 {
        assert!(n >= 1, "below(0)");
        let width = ceil_log2(n);
        loop {
            let v = self.next_bits(width);
            if v < n {
                return v;
            }
        }
    }
}
