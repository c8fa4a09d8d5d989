//! Exact rational thresholds for counting inequalities of the form
//! `bad >= α · total`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A threshold `num / den` in `(0, 1]`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Threshold {
    num: u64,
    den: u64,
}

const MAX_DEN: u64 = 1 << 24;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Threshold {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 || num > den {
            return Err(invalid(format!("threshold {num}/{den} must lie in (0, 1]")));
        }
        let g = gcd(num, den);
        Ok(Threshold { num: num / g, den: den / g })
    }

    /// Best rational approximation with denominator at most 2^24 (continued
    /// fractions), so decimal inputs like `0.1` or `1/96` round-trip exactly.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(invalid(format!("threshold must lie in (0, 1], got {x}")));
        }
        let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
        let mut r = x;
        loop {
            let a = r.floor();
            let ai = a as u64;
            let (p2, q2) = (ai * p1 + p0, ai * q1 + q0);
            if q2 > MAX_DEN {
                break;
            }
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
            let frac = r - a;
            if (p1 as f64 / q1 as f64 - x).abs() <= 1e-12 * x || frac < 1e-12 {
                break;
            }
            r = 1.0 / frac;
        }
        Threshold::new(p1.max(1), q1.max(1))
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `bad >= (num/den) * total`, exactly.
    pub fn reached(self, bad: u64, total: u64) -> bool {
        bad as u128 * self.den as u128 >= self.num as u128 * total as u128
    }

    /// `⌈1/α⌉`.
    pub fn ceil_inverse(self) -> u64 {
        self.den.div_ceil(self.num)
    }

    /// Per-element weight `den·[bad] - num` whose interval sums are
    /// non-negative exactly when the interval reaches the threshold.
    pub(crate) fn weight(self, bad: bool) -> i64 {
        (if bad { self.den as i64 } else { 0 }) - self.num as i64
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_inputs_recover_small_fractions() {
        assert_eq!(Threshold::from_f64(0.1).unwrap(), Threshold::new(1, 10).unwrap());
        assert_eq!(Threshold::from_f64(1.0 / 96.0).unwrap(), Threshold::new(1, 96).unwrap());
        assert_eq!(Threshold::from_f64(0.875).unwrap(), Threshold::new(7, 8).unwrap());
        assert_eq!(Threshold::from_f64(1.0 / 3.0).unwrap(), Threshold::new(1, 3).unwrap());
        assert_eq!(Threshold::from_f64(1.0).unwrap(), Threshold::new(1, 1).unwrap());
        assert!(Threshold::from_f64(0.0).is_err());
        assert!(Threshold::from_f64(1.5).is_err());
    }

    #[test]
    fn exact_comparisons() {
        let t = Threshold::new(1, 10).unwrap();
        assert!(t.reached(1, 10));
        assert!(!t.reached(0, 1));
        assert_eq!(Threshold::new(1, 32).unwrap().ceil_inverse(), 32);
        assert_eq!(Threshold::new(3, 4).unwrap().ceil_inverse(), 2);
    }
}
