//! Chi-square batteries over streams of bit vectors.
//!
//! Every statistical test in a battery is judged at `alpha / m` where `m` is
//! the number of statistical tests (Bonferroni). Structural checks report a
//! pass rate and pass only at rate 1.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bits::{edge_unrank, PackedBits};
use crate::error::{Error, Result};
use crate::graph::{marginal, DistributionSpec, GraphInstance, GraphOracle, Labeled};

pub const DEFAULT_ALPHA: f64 = 0.001;

/// Smallest expected count accepted in any chi-square cell.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
    /// Threshold the p-value was compared against.
    pub threshold: f64,
    pub pass: bool,
}

/// Upper tail `P(χ²_dof ≥ stat)`.
pub fn chi_square_upper(stat: f64, dof: u64) -> Result<f64> {
    if dof == 0 {
        return Err(Error::param("chi-square with zero degrees of freedom"));
    }
    let d = ChiSquared::new(dof as f64).map_err(|e| Error::param(e.to_string()))?;
    Ok(d.sf(stat))
}

fn result(name: &str, statistic: f64, dof: u64, threshold: f64) -> Result<TestResult> {
    let p_value = chi_square_upper(statistic, dof)?;
    Ok(TestResult { name: name.into(), statistic, dof, p_value, threshold, pass: p_value >= threshold })
}

fn too_small(what: &str, expected: f64) -> Error {
    Error::SampleTooSmall(format!("{what}: expected cell count {expected:.2} < {MIN_EXPECTED}"))
}

/// Goodness of fit of category counts against probabilities.
pub fn gof(name: &str, observed: &[u64], probs: &[f64], threshold: f64) -> Result<TestResult> {
    if observed.len() != probs.len() || observed.len() < 2 {
        return Err(Error::param("gof needs matching observed/probability vectors of length ≥ 2"));
    }
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    for (&o, &p) in observed.iter().zip(probs) {
        let e = total as f64 * p;
        if e < MIN_EXPECTED {
            return Err(too_small(name, e));
        }
        stat += (o as f64 - e).powi(2) / e;
    }
    result(name, stat, observed.len() as u64 - 1, threshold)
}

/// Each position `i` is an independent Bernoulli(`probs[i]`) test; the
/// per-position statistics `(o − Np)² / (Np(1−p))` are summed, one degree of
/// freedom each. Positions with `p ∈ {0, 1}` must match exactly.
pub fn marginal_test(name: &str, samples: &[PackedBits], probs: &[f64], threshold: f64) -> Result<TestResult> {
    let n = samples.len() as f64;
    let len = probs.len() as u64;
    if samples.iter().any(|s| s.len() != len) {
        return Err(Error::param("sample length differs from marginal vector"));
    }
    let mut stat = 0.0;
    let mut dof = 0;
    let mut forced_ok = true;
    for (i, &p) in probs.iter().enumerate() {
        let ones = samples.iter().filter(|s| s.get(i as u64)).count() as f64;
        if p <= 0.0 || p >= 1.0 {
            forced_ok &= ones == n * p;
            continue;
        }
        let e = n * p.min(1.0 - p);
        if e < MIN_EXPECTED {
            return Err(too_small(name, e));
        }
        stat += (ones - n * p).powi(2) / (n * p * (1.0 - p));
        dof += 1;
    }
    if dof == 0 {
        return Ok(TestResult { name: name.into(), statistic: 0.0, dof: 0, p_value: 1.0, threshold, pass: forced_ok });
    }
    let mut r = result(name, stat, dof, threshold)?;
    r.pass &= forced_ok;
    Ok(r)
}

/// 2×2 contingency statistic for bits `(a, b)` across samples.
fn independence_2x2(samples: &[PackedBits], a: u64, b: u64, name: &str) -> Result<f64> {
    let mut c = [[0f64; 2]; 2];
    for s in samples {
        c[usize::from(s.get(a))][usize::from(s.get(b))] += 1.0;
    }
    let n = samples.len() as f64;
    let rows = [c[0][0] + c[0][1], c[1][0] + c[1][1]];
    let cols = [c[0][0] + c[1][0], c[0][1] + c[1][1]];
    let mut stat = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let e = rows[i] * cols[j] / n;
            if e < MIN_EXPECTED {
                return Err(too_small(name, e));
            }
            stat += (c[i][j] - e).powi(2) / e;
        }
    }
    Ok(stat)
}

/// Sum of 2×2 independence statistics over the listed position pairs.
pub fn pairwise_test(name: &str, samples: &[PackedBits], pairs: &[(u64, u64)], threshold: f64) -> Result<TestResult> {
    if pairs.is_empty() {
        return Err(Error::param("no pairs to test"));
    }
    let mut stat = 0.0;
    for &(a, b) in pairs {
        if samples.iter().any(|s| a >= s.len() || b >= s.len()) || a == b {
            return Err(Error::param(format!("pair ({a}, {b}) outside the samples")));
        }
        stat += independence_2x2(samples, a, b, name)?;
    }
    result(name, stat, pairs.len() as u64, threshold)
}

/// `|mean − μ| ≤ nsig · σ/√N` for a sample of values with known mean and
/// variance.
pub fn mean_within_sigma(values: &[f64], mu: f64, var: f64, nsig: f64) -> (f64, f64, bool) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let se = (var / n).sqrt();
    let z = (mean - mu) / se;
    (mean, z, z.abs() <= nsig)
}

/// Empirical version of "solving" a testing problem: the detector's accuracy
/// on null plus its accuracy on planted inputs. Solving means this stays
/// bounded above 1.
pub fn solve_criterion(null_outputs: &[bool], planted_outputs: &[bool]) -> Result<f64> {
    if null_outputs.is_empty() || planted_outputs.is_empty() {
        return Err(Error::SampleTooSmall("solve criterion needs both null and planted runs".into()));
    }
    let rej = null_outputs.iter().filter(|&&b| !b).count() as f64 / null_outputs.len() as f64;
    let acc = planted_outputs.iter().filter(|&&b| b).count() as f64 / planted_outputs.len() as f64;
    Ok(rej + acc)
}

/// Tests a battery may run on labelled graph samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "kebab-case")]
pub enum BatteryTest {
    /// Edge frequencies against the exact marginals of `against`.
    EdgeMarginals { against: DistributionSpec },
    /// Independence of the listed edge-rank pairs.
    PairwiseIndependence { pairs: Vec<(u64, u64)> },
    /// One planted vertex per block, all planted pairs adjacent.
    Partite,
    /// Vertex 1 is planted.
    Leakage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatterySpec {
    pub alpha: f64,
    pub tests: Vec<BatteryTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralResult {
    pub name: String,
    pub pass_rate: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub alpha: f64,
    pub samples: u64,
    pub statistical: Vec<TestResult>,
    pub structural: Vec<StructuralResult>,
}

impl BatteryReport {
    pub fn pass(&self) -> bool {
        self.statistical.iter().all(|t| t.pass) && self.structural.iter().all(|t| t.pass)
    }
}

fn planted_ok(g: &Labeled<GraphInstance>, partite: bool, leak: bool) -> Result<bool> {
    let Some(p) = &g.planted else { return Ok(false) };
    let params = g.instance.params();
    if leak && p.first() != Some(&1) {
        return Ok(false);
    }
    if partite {
        if p.len() != params.k as usize {
            return Ok(false);
        }
        for (b, &v) in p.iter().enumerate() {
            if (v - 1) / params.ell != b as u32 {
                return Ok(false);
            }
        }
    }
    for (a, &u) in p.iter().enumerate() {
        for &v in &p[a + 1..] {
            if !g.instance.edge(u, v)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Runs `spec` over graph samples.
pub fn stat_battery(samples: &[Labeled<GraphInstance>], spec: &BatterySpec) -> Result<BatteryReport> {
    if samples.is_empty() {
        return Err(Error::SampleTooSmall("empty sample stream".into()));
    }
    let m = spec
        .tests
        .iter()
        .filter(|t| matches!(t, BatteryTest::EdgeMarginals { .. } | BatteryTest::PairwiseIndependence { .. }))
        .count();
    let threshold = spec.alpha / m.max(1) as f64;
    let bits: Vec<PackedBits> = samples.iter().map(|s| s.instance.edges().clone()).collect();
    let mut report = BatteryReport {
        alpha: spec.alpha,
        samples: samples.len() as u64,
        statistical: Vec::new(),
        structural: Vec::new(),
    };
    for t in &spec.tests {
        match t {
            BatteryTest::EdgeMarginals { against } => {
                let len = bits[0].len();
                let probs = (0..len)
                    .map(|r| {
                        let (i, j) = edge_unrank(r);
                        Ok(marginal(against, &[i, j])?.to_f64().unwrap_or(f64::NAN))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                report.statistical.push(marginal_test("edge-marginals", &bits, &probs, threshold)?);
            }
            BatteryTest::PairwiseIndependence { pairs } => {
                report.statistical.push(pairwise_test("pairwise-independence", &bits, pairs, threshold)?);
            }
            BatteryTest::Partite | BatteryTest::Leakage => {
                let (partite, leak, name) = match t {
                    BatteryTest::Partite => (true, false, "partite"),
                    _ => (false, true, "leakage"),
                };
                let mut ok = 0u64;
                for s in samples {
                    ok += u64::from(planted_ok(s, partite, leak)?);
                }
                let rate = ok as f64 / samples.len() as f64;
                report.structural.push(StructuralResult {
                    name: name.into(),
                    pass_rate: rate,
                    pass: ok == samples.len() as u64,
                });
            }
        }
    }
    Ok(report)
}
