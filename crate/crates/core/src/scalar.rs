//! Scalar abstraction shared by graphs, point sets and builders.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type used for coordinates and edge weights.
///
/// Implemented for `f32` and `f64`. Combinatorial work (shadow counting,
/// expander sampling, orderings) never depends on the scalar; only lengths do.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Relative tolerance for "path length equals t times distance" checks.
    const REL_TOL: f64;

    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 must convert to scalar")
    }

    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize must convert to scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    const REL_TOL: f64 = 1e-5;
}

impl Scalar for f64 {
    const REL_TOL: f64 = 1e-9;
}

/// `a <= b * (1 + tol)`.
pub fn le_rel<T: Scalar>(a: T, b: T) -> bool {
    a.as_f64() <= b.as_f64() * (1.0 + T::REL_TOL)
}

/// `|a - b| <= tol * max(|a|, |b|)`.
pub fn eq_rel<T: Scalar>(a: T, b: T) -> bool {
    let (a, b) = (a.as_f64(), b.as_f64());
    (a - b).abs() <= T::REL_TOL * a.abs().max(b.abs())
}
