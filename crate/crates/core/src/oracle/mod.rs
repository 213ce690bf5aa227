//! Ground truth for tiny instances: exact distributions, exact clique sizes,
//! union bounds and chi-square batteries.

pub mod audit;
pub mod cases;
pub mod clique;
pub mod enumerate;
pub mod stats;

pub use clique::{clique_union_bound, max_clique_bruteforce, max_clique_hypergraph, partite_union_bound};
pub use enumerate::{enumerate_sampler, tv_distance, uniform_bits, ExactDistribution, Outcome, DEFAULT_LEAF_LIMIT};
pub use stats::{stat_battery, BatteryReport, BatterySpec, BatteryTest, TestResult};
