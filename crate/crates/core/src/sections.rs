//! Sparse multivariate polynomials used to write down explicit sections,
//! and the derivations through which the unipotent radical acts on them.

use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::Scalar;

/// Exponent vector over a family's coordinate alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(vars: usize) -> Self {
        Monomial(vec![0; vars])
    }

    pub fn var(vars: usize, index: usize) -> Self {
        let mut e = vec![0; vars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }

    /// Renders with the given variable names, e.g. `x^2*y`.
    pub fn render(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .zip(names)
            .filter(|(e, _)| **e > 0)
            .map(|(e, name)| {
                if *e == 1 {
                    name.clone()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// A polynomial as a map from monomials to nonzero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionPoly<T> {
    terms: BTreeMap<Monomial, T>,
}

impl<T: Scalar> SectionPoly<T> {
    pub fn zero() -> Self {
        SectionPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn from_monomial(m: Monomial) -> Self {
        Self::from_terms([(m, T::one())])
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, T)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, T> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing = existing.clone() + c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add_scaled(&mut self, other: &SectionPoly<T>, factor: &T) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone() * factor.clone());
        }
    }

    pub fn mul(&self, other: &SectionPoly<T>) -> SectionPoly<T> {
        let mut out = SectionPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn pow(&self, exp: u32, vars: usize) -> SectionPoly<T> {
        (0..exp).fold(Self::from_monomial(Monomial::one(vars)), |acc, _| {
            acc.mul(self)
        })
    }

    pub fn mul_monomial(&self, m: &Monomial) -> SectionPoly<T> {
        SectionPoly {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.mul(m), c.clone()))
                .collect(),
        }
    }

    /// The single monomial when the polynomial is one.
    pub fn as_monomial(&self) -> Option<&Monomial> {
        match self.terms.iter().next() {
            Some((m, c)) if self.terms.len() == 1 && c.is_one() => Some(m),
            _ => None,
        }
    }
}

impl<T: Scalar> fmt::Display for SectionPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{c}*{:?}", m.0))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A derivation of the polynomial ring fixed by where it sends each
/// variable; variables not listed go to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub images: Vec<(usize, Monomial)>,
}

impl Derivation {
    /// `var -> image`.
    pub fn sending(var: usize, image: Monomial) -> Self {
        Derivation {
            images: vec![(var, image)],
        }
    }

    /// Leibniz rule: `D(m) = sum_v (dm/dv) * D(v)`.
    pub fn apply_monomial<T: Scalar>(&self, m: &Monomial) -> SectionPoly<T> {
        let mut out = SectionPoly::zero();
        for (var, image) in &self.images {
            let e = m.0[*var];
            if e == 0 {
                continue;
            }
            let mut lowered = m.clone();
            lowered.0[*var] -= 1;
            out.add_term(lowered.mul(image), T::from_i128(e as i128));
        }
        out
    }

    pub fn apply<T: Scalar>(&self, p: &SectionPoly<T>) -> SectionPoly<T> {
        let mut out = SectionPoly::zero();
        for (m, c) in p.terms() {
            out.add_scaled(&self.apply_monomial(m), c);
        }
        out
    }
}

/// Every exponent vector of length `parts` summing to `total`, in
/// lexicographically decreasing order.
pub fn weak_compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn go(total: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first);
            go(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    go(total, parts, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;
    use crate::Rational;
    use num_integer::binomial;

    #[test]
    fn derivation_by_hand() {
        // (y d/dx)(x^2 y) = 2 x y^2 over (x, y, z)
        let d = Derivation::sending(0, Monomial::var(3, 1));
        let image: SectionPoly<Rational> = d.apply_monomial(&Monomial(vec![2, 1, 0]));
        assert_eq!(
            image,
            SectionPoly::from_terms([(Monomial(vec![1, 2, 0]), int(2))])
        );
        // (u -> s v)(u t) = v s t over (s, t, u, v)
        let d = Derivation::sending(2, Monomial(vec![1, 0, 0, 1]));
        let image: SectionPoly<Rational> = d.apply_monomial(&Monomial(vec![0, 1, 1, 0]));
        assert_eq!(image.as_monomial(), Some(&Monomial(vec![1, 1, 0, 1])));
    }

    #[test]
    fn leibniz_on_products() {
        let x = SectionPoly::<Rational>::from_monomial(Monomial(vec![1, 0, 0]));
        let y = SectionPoly::<Rational>::from_monomial(Monomial(vec![0, 1, 0]));
        let mut f = x.mul(&y);
        f.add_term(Monomial(vec![0, 0, 2]), int(-3));
        let g = x.pow(3, 3);
        let d = Derivation {
            images: vec![(0, Monomial(vec![0, 0, 1])), (1, Monomial(vec![0, 0, 1]))],
        };
        let mut rhs = d.apply(&f).mul(&g);
        rhs.add_scaled(&f.mul(&d.apply(&g)), &int(1));
        assert_eq!(d.apply(&f.mul(&g)), rhs);
    }

    #[test]
    fn composition_counts() {
        for total in 0..6u32 {
            for parts in 1..5usize {
                let all = weak_compositions(total, parts);
                assert_eq!(
                    all.len() as u64,
                    binomial((total as u64) + parts as u64 - 1, parts as u64 - 1)
                );
                assert!(all.iter().all(|c| c.iter().sum::<u32>() == total));
            }
        }
        assert_eq!(weak_compositions(0, 0), vec![Vec::<u32>::new()]);
        assert!(weak_compositions(2, 0).is_empty());
    }

    #[test]
    fn monomial_division() {
        let m = Monomial(vec![2, 1, 0]);
        assert_eq!(
            m.div(&Monomial(vec![1, 1, 0])),
            Some(Monomial(vec![1, 0, 0]))
        );
        assert_eq!(m.div(&Monomial(vec![0, 0, 1])), None);
        let names: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        assert_eq!(m.render(&names), "x^2*y");
    }
}
