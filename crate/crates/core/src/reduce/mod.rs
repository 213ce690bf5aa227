//! Reductions from planted clique instances to Sparse PCA, planted submatrix
//! detection and almost k-wise independence testing, plus the
//! recovery-to-detection enumerators.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod detect;
pub mod kwise;
pub mod spca;
pub mod submat;

/// A non-negative fraction `num / den` for parameters given as constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Frac {
    pub num: u64,
    pub den: u64,
}

impl Frac {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::param("fraction with zero denominator"));
        }
        Ok(Frac { num, den })
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// One reported inequality from a parameter region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionCheck {
    pub name: String,
    pub holds: bool,
}

pub(crate) fn check(name: impl Into<String>, holds: bool) -> RegionCheck {
    RegionCheck { name: name.into(), holds }
}

pub(crate) fn failures(checks: &[RegionCheck]) -> Vec<String> {
    checks.iter().filter(|c| !c.holds).map(|c| c.name.clone()).collect()
}

pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
