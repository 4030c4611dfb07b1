//! Univariate polynomials over a [`Scalar`], Newton interpolation from
//! integer samples and finite-difference degree detection.

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatPolyError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("abscissa {0} appears twice")]
    DuplicateAbscissa(i64),
    #[error("sample at {x} is {found}, fitted polynomial gives {expected}")]
    InconsistentSamples {
        x: i64,
        expected: String,
        found: String,
    },
    #[error("a window of {len} values cannot certify any degree")]
    WindowTooShort { len: usize },
    #[error("no forward difference of the {len}-value window is constant")]
    NotPolynomial { len: usize },
}

/// Dense polynomial in one variable `k`; `coeffs[i]` multiplies `k^i`.
///
/// The coefficient vector never ends in a zero, so the zero polynomial has
/// no coefficients at all.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `k^power`.
    pub fn monomial(power: usize) -> Self {
        let mut coeffs = vec![T::zero(); power + 1];
        coeffs[power] = T::one();
        Polynomial { coeffs }
    }

    pub fn from_coeffs(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `k^power`, zero past the degree.
    pub fn coeff(&self, power: usize) -> T {
        self.coeffs.get(power).cloned().unwrap_or_else(T::zero)
    }

    pub fn evaluate(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn evaluate_int(&self, k: i64) -> T {
        self.evaluate(&T::from_i128(k as i128))
    }

    /// `self * (k - root)`.
    fn mul_linear(&self, root: &T) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i + 1] = out[i + 1].clone() + c.clone();
            out[i] = out[i].clone() - c.clone() * root.clone();
        }
        Self::from_coeffs(out)
    }

    fn add_constant(mut self, c: &T) -> Self {
        if self.coeffs.is_empty() {
            return Self::constant(c.clone());
        }
        self.coeffs[0] = self.coeffs[0].clone() + c.clone();
        Self::from_coeffs(self.coeffs)
    }
}

impl<T: Scalar> fmt::Display for Polynomial<T> {
    /// Highest power first, e.g. `3/2 k^2 + 5/2 k + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (power, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let magnitude = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = power == 0 || !magnitude.is_one();
            if show_coeff {
                write!(f, "{magnitude}")?;
            }
            match power {
                0 => {}
                1 if show_coeff => write!(f, " k")?,
                1 => write!(f, "k")?,
                _ if show_coeff => write!(f, " k^{power}")?,
                _ => write!(f, "k^{power}")?,
            }
        }
        Ok(())
    }
}

/// Fits the polynomial of degree at most `degree_bound` through the first
/// `degree_bound + 1` samples using Newton divided differences, then checks
/// every remaining sample against it.
pub fn interpolate<T: Scalar>(
    samples: &[(i64, T)],
    degree_bound: usize,
) -> Result<Polynomial<T>, RatPolyError> {
    let needed = degree_bound + 1;
    if samples.len() < needed {
        return Err(RatPolyError::TooFewSamples {
            needed,
            got: samples.len(),
        });
    }
    for (idx, (x, _)) in samples.iter().enumerate() {
        if samples[..idx].iter().any(|(y, _)| y == x) {
            return Err(RatPolyError::DuplicateAbscissa(*x));
        }
    }

    let fit = &samples[..needed];
    let xs: Vec<T> = fit.iter().map(|(x, _)| T::from_i128(*x as i128)).collect();
    let mut table: Vec<T> = fit.iter().map(|(_, y)| y.clone()).collect();
    // after pass `level`, table[j] holds f[x_{j-level}, ..., x_j]
    for level in 1..needed {
        for j in (level..needed).rev() {
            let num = table[j].clone() - table[j - 1].clone();
            let den = xs[j].clone() - xs[j - level].clone();
            table[j] = num / den;
        }
    }

    // c_0 + (k - x_0)(c_1 + (k - x_1)(c_2 + ...)) by nested multiplication
    let mut poly = Polynomial::constant(table[needed - 1].clone());
    for j in (0..needed - 1).rev() {
        poly = poly.mul_linear(&xs[j]).add_constant(&table[j]);
    }

    for (x, y) in &samples[needed..] {
        let expected = poly.evaluate_int(*x);
        if &expected != y {
            return Err(RatPolyError::InconsistentSamples {
                x: *x,
                expected: expected.to_string(),
                found: y.to_string(),
            });
        }
    }
    Ok(poly)
}

/// Smallest `d` whose `d`-th forward difference is constant across the
/// window. A difference row certifies constancy only if it still has at
/// least two entries.
pub fn finite_difference_degree<T: Scalar>(values: &[T]) -> Result<usize, RatPolyError> {
    if values.len() < 3 {
        return Err(RatPolyError::WindowTooShort { len: values.len() });
    }
    let mut row: Vec<T> = values.to_vec();
    let mut order = 0;
    while row.len() >= 2 {
        if row.windows(2).all(|w| w[0] == w[1]) {
            return Ok(order);
        }
        row = row
            .windows(2)
            .map(|w| w[1].clone() - w[0].clone())
            .collect();
        order += 1;
    }
    Err(RatPolyError::NotPolynomial { len: values.len() })
}
