//! Graded layer profiles, their Hilbert/weight/trace-squared series, exact
//! polynomial fits and the Donaldson-Futaki invariant and norm.
//!
//! Layer `i` of degree `k` carries weight `i`, with the top Loewy layer at
//! weight zero. [`GradedProfile::shift_weights`] moves every layer up, which
//! is how the convention with the whole space at index one is obtained.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::sync::Arc;

use thiserror::Error;

use crate::ratpoly::{interpolate, Polynomial};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("window of {len} degrees is too short; need at least {needed}")]
    WindowTooShort { len: usize, needed: usize },
    #[error("profile has no layers at k = {0}")]
    MissingLayers(u64),
    #[error("fit is not certified polynomial on its window")]
    NotCertified,
    #[error("leading Hilbert coefficient {0} is not positive")]
    DegenerateHilbert(String),
    #[error("bound {c}k is below the top layer {length} at k = {k}")]
    InvalidBound { c: u64, k: u64, length: u64 },
    #[error("Loewy length is not linear on the window: {0}")]
    NonLinearLength(String),
}

/// Which end of the index range holds the top Loewy layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Index `i` is the position in a decreasing filtration.
    Decreasing,
    /// Index `i` is the position in the increasing filtration `i -> F_{-i}`
    /// re-indexed by a right bound; its effective weights are negated.
    Increasing,
}

impl Orientation {
    fn flipped(self) -> Self {
        match self {
            Orientation::Decreasing => Orientation::Increasing,
            Orientation::Increasing => Orientation::Decreasing,
        }
    }
}

type LayerFn = dyn Fn(u64) -> Option<Vec<u128>> + Send + Sync;

/// Layer dimensions `dim gr_i(R_k)` as a function of `k`.
#[derive(Clone)]
pub struct GradedProfile {
    n_dim: usize,
    orientation: Orientation,
    layers: Arc<LayerFn>,
}

impl fmt::Debug for GradedProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GradedProfile")
            .field("n_dim", &self.n_dim)
            .field("orientation", &self.orientation)
            .field("k=1", &self.layers(1))
            .finish()
    }
}

impl GradedProfile {
    /// `layers(k)` returns `gr_0, gr_1, ...` or `None` where undefined.
    pub fn from_fn<F>(n_dim: usize, layers: F) -> Self
    where
        F: Fn(u64) -> Option<Vec<u128>> + Send + Sync + 'static,
    {
        GradedProfile {
            n_dim,
            orientation: Orientation::Decreasing,
            layers: Arc::new(layers),
        }
    }

    /// A profile known only at the tabulated degrees.
    pub fn from_table(n_dim: usize, table: BTreeMap<u64, Vec<u128>>) -> Self {
        Self::from_fn(n_dim, move |k| table.get(&k).cloned())
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Layers at `k` with trailing zero layers removed.
    pub fn layers(&self, k: u64) -> Option<Vec<u128>> {
        let mut layers = (self.layers)(k)?;
        while layers.len() > 1 && layers.last() == Some(&0) {
            layers.pop();
        }
        Some(layers)
    }

    pub fn dim_gr(&self, k: u64, i: u64) -> Option<u128> {
        let layers = self.layers(k)?;
        Some(layers.get(i as usize).copied().unwrap_or(0))
    }

    /// Largest `i` with a nonzero layer; zero for an empty degree.
    pub fn length(&self, k: u64) -> Option<u64> {
        let layers = self.layers(k)?;
        Some(layers.iter().rposition(|&d| d > 0).unwrap_or(0) as u64)
    }

    /// Every layer moved `offset` places up, filling the bottom with zeros.
    pub fn shift_weights(&self, offset: u64) -> Self {
        let inner = self.layers.clone();
        GradedProfile {
            n_dim: self.n_dim,
            orientation: self.orientation,
            layers: Arc::new(move |k| {
                let mut shifted = vec![0; offset as usize];
                shifted.extend(inner(k)?);
                Some(shifted)
            }),
        }
    }
}

/// Exact `(h, w, d)` at one degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesValues {
    pub h: i128,
    pub w: i128,
    pub d: i128,
}

pub fn series_values(profile: &GradedProfile, k: u64) -> Result<SeriesValues, ProfileError> {
    let layers = profile.layers(k).ok_or(ProfileError::MissingLayers(k))?;
    let mut out = SeriesValues { h: 0, w: 0, d: 0 };
    for (i, &dim) in layers.iter().enumerate() {
        let (i, dim) = (i as i128, dim as i128);
        out.h += dim;
        out.w += i * dim;
        out.d += i * i * dim;
    }
    Ok(out)
}

/// Which of the three series failed to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    Hilbert,
    Weight,
    TraceSquared,
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Series::Hilbert => "h",
            Series::Weight => "w",
            Series::TraceSquared => "d",
        })
    }
}

/// Exact fits of `h`, `w`, `d` with degree bounds `n`, `n+1`, `n+2`.
///
/// `a0, a1` are the `k^n, k^(n-1)` coefficients of `h`, `b0, b1` the
/// `k^(n+1), k^n` coefficients of `w` and `d0` the `k^(n+2)` coefficient of
/// `d`, read off the fitted polynomials as they stand.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFit<T> {
    pub n_dim: usize,
    pub orientation: Orientation,
    pub window: RangeInclusive<u64>,
    pub h: Polynomial<T>,
    pub w: Polynomial<T>,
    pub d: Polynomial<T>,
    pub a0: T,
    pub a1: T,
    pub b0: T,
    pub b1: T,
    pub d0: T,
    /// All window samples lie on the fitted polynomials.
    pub polynomial_certified: bool,
    /// First series and degree that left its polynomial, if any.
    pub first_inconsistency: Option<(Series, u64)>,
}

impl<T: Scalar> SeriesFit<T> {
    /// `b0 a1 - b1 a0`, with the weights of an increasing profile negated.
    pub fn df_num(&self) -> T {
        let (b0, b1) = self.effective_b();
        b0 * self.a1.clone() - b1 * self.a0.clone()
    }

    fn effective_b(&self) -> (T, T) {
        match self.orientation {
            Orientation::Decreasing => (self.b0.clone(), self.b1.clone()),
            Orientation::Increasing => (-self.b0.clone(), -self.b1.clone()),
        }
    }

    /// Whether `deg h = n`, `deg w = n + 1` and `deg d = n + 2`.
    pub fn degrees_exact(&self) -> bool {
        let n = self.n_dim;
        self.h.degree() == Some(n)
            && self.w.degree() == Some(n + 1)
            && self.d.degree() == Some(n + 2)
    }
}

/// The default fit window `1..=n+6`.
pub fn default_window(n_dim: usize) -> RangeInclusive<u64> {
    1..=(n_dim as u64 + 6)
}

/// Fits `h`, `w`, `d` on `window`, which needs at least `n + 4` degrees.
/// Samples off the fitted polynomials clear `polynomial_certified` rather
/// than failing.
pub fn fit_series<T: Scalar>(
    profile: &GradedProfile,
    window: RangeInclusive<u64>,
) -> Result<SeriesFit<T>, ProfileError> {
    let n = profile.n_dim();
    let ks: Vec<u64> = window.clone().collect();
    if ks.len() < n + 4 {
        return Err(ProfileError::WindowTooShort {
            len: ks.len(),
            needed: n + 4,
        });
    }
    let values = ks
        .iter()
        .map(|&k| series_values(profile, k))
        .collect::<Result<Vec<_>, _>>()?;

    let mut first_inconsistency = None;
    let mut fit_one = |series: Series, bound: usize, pick: fn(&SeriesValues) -> i128| {
        let samples: Vec<(i64, T)> = ks
            .iter()
            .zip(&values)
            .map(|(&k, v)| (k as i64, T::from_i128(pick(v))))
            .collect();
        let poly = interpolate(&samples[..bound + 1], bound).expect("distinct abscissae");
        let bad = samples[bound + 1..]
            .iter()
            .find(|(k, y)| &poly.evaluate_int(*k) != y);
        if let (Some((k, _)), None) = (bad, &first_inconsistency) {
            first_inconsistency = Some((series, *k as u64));
        }
        poly
    };
    let h = fit_one(Series::Hilbert, n, |v| v.h);
    let w = fit_one(Series::Weight, n + 1, |v| v.w);
    let d = fit_one(Series::TraceSquared, n + 2, |v| v.d);

    let below = |p: &Polynomial<T>, top: usize| {
        if top == 0 {
            T::zero()
        } else {
            p.coeff(top - 1)
        }
    };
    Ok(SeriesFit {
        n_dim: n,
        orientation: profile.orientation(),
        window,
        a0: h.coeff(n),
        a1: below(&h, n),
        b0: w.coeff(n + 1),
        b1: w.coeff(n),
        d0: d.coeff(n + 2),
        polynomial_certified: first_inconsistency.is_none(),
        first_inconsistency,
        h,
        w,
        d,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DfReport<T> {
    pub a0: T,
    pub a1: T,
    pub b0: T,
    pub b1: T,
    pub d0: T,
    pub df_num: T,
    pub df: T,
    pub norm: T,
    pub length_slope: T,
    pub certified: bool,
}

/// `df_num = b0 a1 - b1 a0`, `df = df_num / a0`, `norm = (d0 a0 - b0²) / a0`.
pub fn df_and_norm<T: Scalar>(
    fit: &SeriesFit<T>,
    length_slope: T,
) -> Result<DfReport<T>, ProfileError> {
    if !fit.polynomial_certified {
        return Err(ProfileError::NotCertified);
    }
    if !fit.a0.is_positive() {
        return Err(ProfileError::DegenerateHilbert(fit.a0.to_string()));
    }
    let (b0, _) = fit.effective_b();
    let df_num = fit.df_num();
    let norm = (fit.d0.clone() * fit.a0.clone() - b0.clone() * b0) / fit.a0.clone();
    Ok(DfReport {
        a0: fit.a0.clone(),
        a1: fit.a1.clone(),
        b0: fit.b0.clone(),
        b1: fit.b1.clone(),
        d0: fit.d0.clone(),
        df: df_num.clone() / fit.a0.clone(),
        df_num,
        norm,
        length_slope,
        certified: true,
    })
}

/// Re-indexes `gr'(k, i) = gr(k, ck - i)` and flips the orientation, after
/// checking `length(k) <= ck` on `window`. Outside the window, degrees that
/// violate the bound read as missing.
pub fn swap_convention(
    profile: &GradedProfile,
    c: u64,
    window: RangeInclusive<u64>,
) -> Result<GradedProfile, ProfileError> {
    for k in window {
        let length = profile.length(k).ok_or(ProfileError::MissingLayers(k))?;
        if length > c * k {
            return Err(ProfileError::InvalidBound { c, k, length });
        }
    }
    let inner = profile.clone();
    Ok(GradedProfile {
        n_dim: profile.n_dim,
        orientation: profile.orientation.flipped(),
        layers: Arc::new(move |k| {
            let layers = inner.layers(k)?;
            let top = (c * k) as usize;
            if layers.len() > top + 1 {
                return None;
            }
            Some(
                (0..=top)
                    .map(|i| layers.get(top - i).copied().unwrap_or(0))
                    .collect(),
            )
        }),
    })
}

/// Slope of the Loewy length, fitted as a polynomial of degree at most one
/// on `window`.
pub fn length_slope<T: Scalar>(
    profile: &GradedProfile,
    window: RangeInclusive<u64>,
) -> Result<T, ProfileError> {
    let samples = window
        .map(|k| {
            let length = profile.length(k).ok_or(ProfileError::MissingLayers(k))?;
            Ok((k as i64, T::from_i128(length as i128)))
        })
        .collect::<Result<Vec<_>, ProfileError>>()?;
    let line =
        interpolate(&samples, 1).map_err(|e| ProfileError::NonLinearLength(e.to_string()))?;
    Ok(line.coeff(1))
}
