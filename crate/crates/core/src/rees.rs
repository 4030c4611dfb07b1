//! Truncations of the Loewy filtration to the subalgebra generated in
//! degrees at most `r`, on the monomial models.
//!
//! A degree-`k` monomial lies in `F^(r)_i` exactly when it factors into
//! section monomials of degrees at most `r` whose Loewy weights add up to at
//! least `i`. The best such weight is found by dynamic programming over
//! degrees.

use std::collections::HashMap;
use std::ops::RangeInclusive;

use crate::families::{FamilyError, FamilySpec};
use crate::profiles::{series_values, GradedProfile};
use crate::sections::Monomial;

/// Best factorization weights of every section monomial, degree by degree.
#[derive(Debug, Clone)]
pub struct TruncationTable {
    spec: FamilySpec,
    r: u64,
    /// `best[k]` maps each basis monomial of degree `k` to its best weight.
    best: Vec<HashMap<Monomial, u64>>,
    cap: u128,
}

impl TruncationTable {
    pub fn new(spec: &FamilySpec, r: u64, cap: u128) -> Result<Self, FamilyError> {
        let vars = spec.variables().len();
        Ok(TruncationTable {
            spec: spec.clone(),
            r: r.max(1),
            best: vec![HashMap::from([(Monomial::one(vars), 0)])],
            cap,
        })
    }

    fn extend_to(&mut self, k: u64) -> Result<(), FamilyError> {
        while (self.best.len() as u64) <= k {
            let degree = self.best.len() as u64;
            let basis = self.spec.monomial_basis(degree, self.cap)?;
            let mut table = HashMap::with_capacity(basis.len());
            for m in basis {
                let mut best = if degree <= self.r {
                    self.spec.loewy_weight(&m, degree).unwrap_or(0)
                } else {
                    0
                };
                for p in 1..=self.r.min(degree - 1) {
                    let rest = (degree - p) as usize;
                    for (g, gw) in &self.best[p as usize] {
                        let Some(quotient) = m.div(g) else { continue };
                        if let Some(qw) = self.best[rest].get(&quotient) {
                            best = best.max(gw + qw);
                        }
                    }
                }
                table.insert(m, best);
            }
            self.best.push(table);
        }
        Ok(())
    }

    /// `dim F^(r)_i R_k` for `i = 0..=ll(k)`.
    pub fn dims(&mut self, k: u64) -> Result<Vec<u128>, FamilyError> {
        self.extend_to(k)?;
        let top = self.spec.loewy_length(k);
        let table = &self.best[k as usize];
        Ok((0..=top)
            .map(|i| table.values().filter(|&&w| w >= i).count() as u128)
            .collect())
    }

    /// Layer dimensions of the truncation at `k`.
    pub fn layers(&mut self, k: u64) -> Result<Vec<u128>, FamilyError> {
        let mut dims = self.dims(k)?;
        dims.push(0);
        Ok(dims.windows(2).map(|w| w[0] - w[1]).collect())
    }
}

/// `dim F^(r)_i R_k` for `i = 0..=ll(k)`.
pub fn truncated_filtration(
    spec: &FamilySpec,
    r: u64,
    k: u64,
    cap: u128,
) -> Result<Vec<u128>, FamilyError> {
    TruncationTable::new(spec, r, cap)?.dims(k)
}

/// The truncation as a profile tabulated on `ks`.
pub fn truncated_profile(
    spec: &FamilySpec,
    r: u64,
    ks: RangeInclusive<u64>,
    cap: u128,
) -> Result<GradedProfile, FamilyError> {
    let mut table = TruncationTable::new(spec, r, cap)?;
    let mut layers = std::collections::BTreeMap::new();
    for k in ks {
        layers.insert(k, table.layers(k)?);
    }
    Ok(GradedProfile::from_table(spec.dimension(), layers))
}

/// Whether the weight series of `F^(r)` equals the Loewy weight series on
/// `window`.
pub fn stabilization_check(
    spec: &FamilySpec,
    r: u64,
    window: RangeInclusive<u64>,
    cap: u128,
) -> Result<bool, FamilyError> {
    let truncated = truncated_profile(spec, r, window.clone(), cap)?;
    let loewy = spec.profile()?;
    for k in window {
        let lhs = series_values(&truncated, k).expect("tabulated");
        let rhs = series_values(&loewy, k).expect("closed form");
        if lhs.w != rhs.w {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The first `r` in `1..=rmax` whose truncation matches on `window`.
pub fn first_stabilizing_r(
    spec: &FamilySpec,
    rmax: u64,
    window: RangeInclusive<u64>,
    cap: u128,
) -> Result<Option<u64>, FamilyError> {
    for r in 1..=rmax {
        if stabilization_check(spec, r, window.clone(), cap)? {
            return Ok(Some(r));
        }
    }
    Ok(None)
}
