//! Sparse exact linear algebra: incremental echelon bases, reduction modulo
//! a subspace, coordinates with respect to a spanning set, and null spaces.
//!
//! Vectors are `BTreeMap<column, value>` with no stored zeros. All
//! elimination is plain Gauss-Jordan over the scalar field; with
//! [`Rational`](crate::Rational) entries nothing is ever rounded.

use std::collections::BTreeMap;

use crate::scalar::Scalar;

pub type SparseVec<T> = BTreeMap<usize, T>;

/// `target += factor * source`, dropping cancelled entries.
pub fn axpy<T: Scalar>(target: &mut SparseVec<T>, factor: &T, source: &SparseVec<T>) {
    if factor.is_zero() {
        return;
    }
    for (col, value) in source {
        let add = factor.clone() * value.clone();
        match target.get_mut(col) {
            Some(entry) => {
                *entry = entry.clone() + add;
                if entry.is_zero() {
                    target.remove(col);
                }
            }
            None => {
                target.insert(*col, add);
            }
        }
    }
}

pub fn scale<T: Scalar>(v: &SparseVec<T>, factor: &T) -> SparseVec<T> {
    if factor.is_zero() {
        return SparseVec::new();
    }
    v.iter()
        .map(|(c, x)| (*c, x.clone() * factor.clone()))
        .collect()
}

#[derive(Debug, Clone)]
struct Row<T> {
    vec: SparseVec<T>,
    /// Expression of `vec` in terms of the ids passed to `insert_with_id`.
    combo: SparseVec<T>,
}

/// A subspace kept in semi-echelon form: every row has a distinct leading
/// column (its pivot) normalised to one.
#[derive(Debug, Clone)]
pub struct EchelonBasis<T> {
    rows: BTreeMap<usize, Row<T>>,
}

impl<T: Scalar> Default for EchelonBasis<T> {
    fn default() -> Self {
        EchelonBasis {
            rows: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> EchelonBasis<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_vectors<'a, I>(vectors: I) -> Self
    where
        I: IntoIterator<Item = &'a SparseVec<T>>,
        T: 'a,
    {
        let mut basis = Self::new();
        for v in vectors {
            basis.insert(v.clone());
        }
        basis
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn vectors(&self) -> impl Iterator<Item = &SparseVec<T>> + '_ {
        self.rows.values().map(|r| &r.vec)
    }

    /// Subtracts basis rows until no pivot column of `v` is nonzero.
    /// The result is the canonical representative of `v` modulo the span.
    pub fn reduce(&self, v: SparseVec<T>) -> SparseVec<T> {
        self.reduce_tracked(v, SparseVec::new()).0
    }

    fn reduce_tracked(
        &self,
        mut v: SparseVec<T>,
        mut combo: SparseVec<T>,
    ) -> (SparseVec<T>, SparseVec<T>) {
        let mut cursor = 0;
        loop {
            let next = v
                .range(cursor..)
                .map(|(c, _)| *c)
                .find(|c| self.rows.contains_key(c));
            let Some(col) = next else { break };
            let row = &self.rows[&col];
            let factor = -v[&col].clone();
            axpy(&mut v, &factor, &row.vec);
            axpy(&mut combo, &factor, &row.combo);
            cursor = col + 1;
        }
        (v, combo)
    }

    pub fn contains(&self, v: &SparseVec<T>) -> bool {
        self.reduce(v.clone()).is_empty()
    }

    /// Adds `v` to the span; returns whether the rank grew.
    pub fn insert(&mut self, v: SparseVec<T>) -> bool {
        self.insert_row(v, SparseVec::new())
    }

    /// Like [`insert`](Self::insert) but remembers `v` as generator `id`, so
    /// that [`coordinates`](Self::coordinates) can express vectors in terms
    /// of the generators.
    pub fn insert_with_id(&mut self, v: SparseVec<T>, id: usize) -> bool {
        let mut combo = SparseVec::new();
        combo.insert(id, T::one());
        self.insert_row(v, combo)
    }

    fn insert_row(&mut self, v: SparseVec<T>, combo: SparseVec<T>) -> bool {
        let (residual, combo) = self.reduce_tracked(v, combo);
        let Some((&pivot, lead)) = residual.iter().next() else {
            return false;
        };
        let inv = T::one() / lead.clone();
        let row = Row {
            vec: scale(&residual, &inv),
            combo: scale(&combo, &inv),
        };
        self.rows.insert(pivot, row);
        true
    }

    /// Coefficients `c` with `v = sum c[id] * generator[id]`, or `None` if
    /// `v` is outside the span. Only meaningful when every row was added
    /// through [`insert_with_id`](Self::insert_with_id).
    pub fn coordinates(&self, v: &SparseVec<T>) -> Option<SparseVec<T>> {
        let (residual, combo) = self.reduce_tracked(v.clone(), SparseVec::new());
        if residual.is_empty() {
            Some(scale(&combo, &-T::one()))
        } else {
            None
        }
    }

    /// Reduced row echelon form: pivot columns are zero outside their row.
    pub fn into_rref(mut self) -> Vec<(usize, SparseVec<T>)> {
        let pivots: Vec<usize> = self.rows.keys().rev().copied().collect();
        for &p in &pivots {
            let pivot_row = self.rows[&p].vec.clone();
            for (&q, row) in self.rows.range_mut(..p) {
                debug_assert!(q < p);
                if let Some(x) = row.vec.get(&p).cloned() {
                    axpy(&mut row.vec, &-x, &pivot_row);
                }
            }
        }
        self.rows.into_iter().map(|(p, r)| (p, r.vec)).collect()
    }
}

/// Basis of `{ x : row . x = 0 for every row }` in a space with `ncols`
/// coordinates.
pub fn nullspace<T: Scalar>(rows: &[SparseVec<T>], ncols: usize) -> Vec<SparseVec<T>> {
    let rref = EchelonBasis::from_vectors(rows).into_rref();
    let pivot_cols: std::collections::BTreeSet<usize> = rref.iter().map(|(p, _)| *p).collect();
    let mut kernel = Vec::new();
    for free in (0..ncols).filter(|c| !pivot_cols.contains(c)) {
        let mut v = SparseVec::new();
        v.insert(free, T::one());
        for (pivot, row) in &rref {
            if let Some(x) = row.get(&free) {
                v.insert(*pivot, -x.clone());
            }
        }
        kernel.push(v);
    }
    kernel
}
