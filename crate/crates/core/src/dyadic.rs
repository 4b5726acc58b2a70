//! Exact dyadic rationals `num / 2^exp`.
//!
//! Bisection only ever creates edge midpoints, so every vertex generated
//! from a dyadic initial mesh stays dyadic. Keeping coordinates exact makes
//! vertex identity a hash lookup instead of a tolerance test.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest denominator exponent we accept. Keeps numerators well inside i128
/// for meshes on the unit cube.
pub const MAX_EXP: u32 = 120;

/// A dyadic rational in normal form: either zero with `exp == 0`, or an odd
/// numerator, or `exp == 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i128, u32)", into = "(i128, u32)")]
pub struct Dyadic {
    num: i128,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };

    /// `num / 2^exp`, normalized.
    pub fn new(num: i128, exp: u32) -> Result<Self> {
        if exp > MAX_EXP {
            return Err(Error::CoordinateOverflow(MAX_EXP));
        }
        Ok(Self::normalized(num, exp))
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic { num: v as i128, exp: 0 }
    }

    fn normalized(mut num: i128, mut exp: u32) -> Self {
        if num == 0 {
            return Dyadic::ZERO;
        }
        let tz = num.trailing_zeros().min(exp);
        num >>= tz;
        exp -= tz;
        Dyadic { num, exp }
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    /// Numerator when written over `2^exp` (requires `exp >= self.exp`).
    pub fn scaled_numerator(&self, exp: u32) -> Result<i128> {
        debug_assert!(exp >= self.exp);
        let shift = exp - self.exp;
        self.num
            .checked_mul(1i128.checked_shl(shift).ok_or(Error::CoordinateOverflow(MAX_EXP))?)
            .filter(|v| v.unsigned_abs() < (1u128 << 125))
            .ok_or(Error::CoordinateOverflow(MAX_EXP))
    }

    /// `(self + other) / 2`.
    pub fn midpoint(&self, other: &Dyadic) -> Result<Dyadic> {
        let e = self.exp.max(other.exp);
        let a = self.scaled_numerator(e)?;
        let b = other.scaled_numerator(e)?;
        let sum = a.checked_add(b).ok_or(Error::CoordinateOverflow(MAX_EXP))?;
        Dyadic::new(sum, e + 1)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / 2f64.powi(self.exp as i32)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(1) << self.exp)
    }
}

impl TryFrom<(i128, u32)> for Dyadic {
    type Error = Error;

    fn try_from((num, exp): (i128, u32)) -> Result<Self> {
        Dyadic::new(num, exp)
    }
}

impl From<Dyadic> for (i128, u32) {
    fn from(d: Dyadic) -> Self {
        (d.num, d.exp)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        // Comparison through BigInt avoids any overflow in the shift.
        let e = self.exp.max(other.exp);
        let a = BigInt::from(self.num) << (e - self.exp);
        let b = BigInt::from(other.num) << (e - other.exp);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}
