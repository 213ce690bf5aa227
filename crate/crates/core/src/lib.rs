//! Planted-clique families, randomness harvesting and logspace reductions,
//! with exact checks for small instances.

pub mod bits;
pub mod error;
pub mod fixed;
pub mod format;
pub mod graph;
pub mod harvest;
pub mod oracle;
pub mod permute;
pub mod pipeline;
pub mod reduce;
pub mod tape;

pub use error::{Error, Result};
