//! The scalar abstraction shared by the polynomial, linear-algebra and
//! series-fitting code.
//!
//! Everything in the crate that does arithmetic is written against
//! [`Scalar`]. The catalog, the oracle and the CLI instantiate it with the
//! exact [`Rational`](crate::Rational) type; `f64`/`f32` are supported for
//! quick experiments, but zero tests are then exact float comparisons and no
//! certification claim carries over.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed};

/// A field element usable by the generic algorithms.
pub trait Scalar: Clone + Debug + Display + PartialEq + Num + Signed + Neg<Output = Self> {
    /// Embeds an integer.
    fn from_i128(value: i128) -> Self;

    /// Whether arithmetic on this type is exact.
    fn is_exact() -> bool;
}

impl Scalar for BigRational {
    fn from_i128(value: i128) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn is_exact() -> bool {
        true
    }
}

impl Scalar for f64 {
    fn from_i128(value: i128) -> Self {
        value as f64
    }

    fn is_exact() -> bool {
        false
    }
}

impl Scalar for f32 {
    fn from_i128(value: i128) -> Self {
        value as f32
    }

    fn is_exact() -> bool {
        false
    }
}

/// Builds the rational `num/den`.
///
/// # Panics
///
/// Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> BigRational {
    assert!(den != 0, "zero denominator");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as a rational.
pub fn int(value: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(value))
}

/// Parses `"p/q"` or `"p"`, the wire format used for rationals.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q == BigInt::from(0) {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => text.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}
