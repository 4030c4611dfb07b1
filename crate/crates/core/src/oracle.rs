//! Brute-force Loewy and socle filtrations of explicit nilpotent operator
//! sets, computed by exact row reduction, and the checks that compare them
//! with the closed forms of the catalog.
//!
//! The radical filtration uses `F_{i+1} = u . F_i`; the socle filtration is
//! built independently from kernels, so the two only agree through the
//! duality between a module and its dual.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::families::{Divisor, FamilyError, FamilySpec};
use crate::linalg::{axpy, nullspace, EchelonBasis, SparseVec};
use crate::scalar::Scalar;
use crate::sections::{Monomial, SectionPoly};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("operators are not nilpotent: the chain stalls at dimension {0}")]
    NonNilpotent(usize),
    #[error("operator {op} sends section {section} outside the section space")]
    NotInvariant { op: usize, section: usize },
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Linear maps on a `dimension`-dimensional space, each stored by the images
/// of the basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet<T> {
    dimension: usize,
    columns: Vec<Vec<SparseVec<T>>>,
}

impl<T: Scalar> OperatorSet<T> {
    /// An empty set acts as zero on the space.
    pub fn empty(dimension: usize) -> Self {
        OperatorSet {
            dimension,
            columns: Vec::new(),
        }
    }

    /// `columns[j][c]` is the image of basis vector `c` under operator `j`.
    pub fn from_columns(dimension: usize, columns: Vec<Vec<SparseVec<T>>>) -> Self {
        assert!(columns.iter().all(|op| op.len() == dimension));
        OperatorSet { dimension, columns }
    }

    /// Dense matrices, `matrix[row][col]`.
    pub fn from_dense(matrices: &[Vec<Vec<T>>]) -> Self {
        let dimension = matrices.first().map_or(0, |m| m.len());
        let columns = matrices
            .iter()
            .map(|m| {
                (0..dimension)
                    .map(|c| {
                        (0..dimension)
                            .filter(|&r| !m[r][c].is_zero())
                            .map(|r| (r, m[r][c].clone()))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        OperatorSet { dimension, columns }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn apply(&self, op: usize, v: &SparseVec<T>) -> SparseVec<T> {
        let mut out = SparseVec::new();
        for (c, x) in v {
            axpy(&mut out, x, &self.columns[op][*c]);
        }
        out
    }

    /// The contragredient action `-N^T` on the dual space.
    pub fn dual(&self) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|op| {
                let mut transposed = vec![SparseVec::new(); self.dimension];
                for (c, image) in op.iter().enumerate() {
                    for (r, x) in image {
                        transposed[*r].insert(c, -x.clone());
                    }
                }
                transposed
            })
            .collect();
        OperatorSet {
            dimension: self.dimension,
            columns,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    /// `dim F_0 >= dim F_1 >= ... >= 0`.
    Radical,
    /// `dim S_1 <= dim S_2 <= ... <= dim V`.
    Socle,
}

/// A filtration by subspaces with explicit echelon bases.
#[derive(Debug, Clone)]
pub struct SubspaceChain<T> {
    pub kind: ChainKind,
    pub dims: Vec<usize>,
    pub bases: Vec<EchelonBasis<T>>,
}

impl<T: Scalar> SubspaceChain<T> {
    /// Layer dimensions, top layer first for the radical chain and
    /// socle first for the socle chain.
    pub fn layers(&self) -> Vec<usize> {
        match self.kind {
            ChainKind::Radical => self.dims.windows(2).map(|w| w[0] - w[1]).collect(),
            ChainKind::Socle => {
                let mut prev = 0;
                self.dims
                    .iter()
                    .map(|&d| {
                        let layer = d - prev;
                        prev = d;
                        layer
                    })
                    .collect()
            }
        }
    }

    /// Index of the last nonzero layer.
    pub fn length(&self) -> usize {
        self.layers().len().saturating_sub(1)
    }
}

fn unit<T: Scalar>(c: usize) -> SparseVec<T> {
    SparseVec::from([(c, T::one())])
}

pub fn radical_filtration<T: Scalar>(
    ops: &OperatorSet<T>,
) -> Result<SubspaceChain<T>, OracleError> {
    let full = EchelonBasis::from_vectors(&(0..ops.dimension()).map(unit).collect::<Vec<_>>());
    let mut dims = vec![full.rank()];
    let mut bases = vec![full];
    while *dims.last().unwrap() > 0 {
        let current = bases.last().unwrap();
        let mut next = EchelonBasis::new();
        for v in current.vectors() {
            for op in 0..ops.len() {
                next.insert(ops.apply(op, v));
            }
        }
        if next.rank() == current.rank() {
            return Err(OracleError::NonNilpotent(next.rank()));
        }
        dims.push(next.rank());
        bases.push(next);
    }
    if dims.len() == 1 {
        // the zero space still has one (empty) layer
        dims.push(0);
        bases.push(EchelonBasis::new());
    }
    Ok(SubspaceChain {
        kind: ChainKind::Radical,
        dims,
        bases,
    })
}

pub fn socle_filtration<T: Scalar>(ops: &OperatorSet<T>) -> Result<SubspaceChain<T>, OracleError> {
    let dim = ops.dimension();
    let mut current: EchelonBasis<T> = EchelonBasis::new();
    let mut dims = Vec::new();
    let mut bases = Vec::new();
    loop {
        // v lies in the next term iff every N v vanishes modulo the current one
        let mut rows: BTreeMap<(usize, usize), SparseVec<T>> = BTreeMap::new();
        for op in 0..ops.len() {
            for c in 0..dim {
                let residue = current.reduce(ops.apply(op, &unit(c)));
                for (coord, x) in residue {
                    rows.entry((op, coord)).or_default().insert(c, x);
                }
            }
        }
        let rows: Vec<SparseVec<T>> = rows.into_values().collect();
        let next = EchelonBasis::from_vectors(&nullspace(&rows, dim));
        if next.rank() == current.rank() && next.rank() < dim {
            return Err(OracleError::NonNilpotent(next.rank()));
        }
        dims.push(next.rank());
        bases.push(next.clone());
        current = next;
        if current.rank() == dim {
            break;
        }
    }
    Ok(SubspaceChain {
        kind: ChainKind::Socle,
        dims,
        bases,
    })
}

/// Radical layers of `V` against socle layers of the dual module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualityReport {
    pub radical_layers: Vec<usize>,
    pub dual_socle_layers: Vec<usize>,
}

impl DualityReport {
    pub fn holds(&self) -> bool {
        self.radical_layers == self.dual_socle_layers
    }
}

pub fn duality_report<T: Scalar>(ops: &OperatorSet<T>) -> Result<DualityReport, OracleError> {
    Ok(DualityReport {
        radical_layers: radical_filtration(ops)?.layers(),
        dual_socle_layers: socle_filtration(&ops.dual())?.layers(),
    })
}

pub fn duality_check<T: Scalar>(ops: &OperatorSet<T>) -> bool {
    duality_report(ops).is_ok_and(|r| r.holds())
}

/// `H^0(X, kL)` with an explicit basis of sections, and the coordinates of
/// polynomials with respect to it.
#[derive(Debug, Clone)]
pub struct SectionSpace {
    pub sections: Vec<SectionPoly<Rational>>,
    index: BTreeMap<Monomial, usize>,
    echelon: EchelonBasis<Rational>,
}

impl SectionSpace {
    pub fn new(sections: Vec<SectionPoly<Rational>>) -> Self {
        let mut index = BTreeMap::new();
        for p in &sections {
            for m in p.terms().keys() {
                let next = index.len();
                index.entry(m.clone()).or_insert(next);
            }
        }
        let mut space = SectionSpace {
            sections,
            index,
            echelon: EchelonBasis::new(),
        };
        for id in 0..space.sections.len() {
            let v = space.ambient(&space.sections[id]).expect("indexed above");
            space.echelon.insert_with_id(v, id);
        }
        space
    }

    pub fn of_family(spec: &FamilySpec, k: u64, cap: u128) -> Result<Self, FamilyError> {
        Ok(Self::new(spec.section_basis(k, cap)?))
    }

    pub fn dimension(&self) -> usize {
        self.sections.len()
    }

    /// Coefficients on the monomials of the space; `None` if `p` uses a
    /// monomial no section does.
    pub fn ambient(&self, p: &SectionPoly<Rational>) -> Option<SparseVec<Rational>> {
        p.terms()
            .iter()
            .map(|(m, c)| self.index.get(m).map(|&col| (col, c.clone())))
            .collect()
    }

    /// Coordinates in the section basis, or `None` outside the space.
    pub fn coordinates(&self, p: &SectionPoly<Rational>) -> Option<SparseVec<Rational>> {
        self.echelon.coordinates(&self.ambient(p)?)
    }

    pub fn polynomial(&self, coords: &SparseVec<Rational>) -> SectionPoly<Rational> {
        let mut out = SectionPoly::zero();
        for (id, c) in coords {
            out.add_scaled(&self.sections[*id], c);
        }
        out
    }
}

/// The Lie algebra of the unipotent radical acting on `H^0(X, kL)`.
pub fn derivations(
    spec: &FamilySpec,
    k: u64,
    cap: u128,
) -> Result<(SectionSpace, OperatorSet<Rational>), OracleError> {
    let space = SectionSpace::of_family(spec, k, cap)?;
    let mut columns = Vec::new();
    for (op, derivation) in spec.lie_algebra().iter().enumerate() {
        let images = space
            .sections
            .iter()
            .enumerate()
            .map(|(section, p)| {
                let image = derivation.apply(p);
                if image.is_zero() {
                    return Ok(SparseVec::new());
                }
                space
                    .coordinates(&image)
                    .ok_or(OracleError::NotInvariant { op, section })
            })
            .collect::<Result<Vec<_>, _>>()?;
        columns.push(images);
    }
    let dimension = space.dimension();
    Ok((space, OperatorSet::from_columns(dimension, columns)))
}

/// Oracle layers against the closed form at one degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerComparison {
    pub k: u64,
    pub expected_layers: Vec<u128>,
    pub oracle_layers: Vec<u128>,
    pub expected_length: u64,
    pub oracle_length: u64,
}

impl LayerComparison {
    pub fn matches(&self) -> bool {
        self.expected_layers == self.oracle_layers && self.expected_length == self.oracle_length
    }
}

pub fn compare_oracle_closed_form(
    spec: &FamilySpec,
    ks: impl IntoIterator<Item = u64>,
    cap: u128,
) -> Result<Vec<LayerComparison>, OracleError> {
    ks.into_iter()
        .map(|k| {
            let (_, ops) = derivations(spec, k, cap)?;
            let chain = radical_filtration(&ops)?;
            Ok(LayerComparison {
                k,
                expected_layers: spec.layers(k),
                oracle_layers: chain.layers().into_iter().map(|d| d as u128).collect(),
                expected_length: spec.loewy_length(k),
                oracle_length: chain.length() as u64,
            })
        })
        .collect()
}

/// The Loewy filtration of one degree as polynomials.
struct LoewyDegree {
    space: SectionSpace,
    /// `terms[i]` spans `F_i` inside the ambient monomial coordinates.
    terms: Vec<EchelonBasis<Rational>>,
    polys: Vec<Vec<SectionPoly<Rational>>>,
}

fn loewy_degree(spec: &FamilySpec, k: u64, cap: u128) -> Result<LoewyDegree, OracleError> {
    let (space, ops) = derivations(spec, k, cap)?;
    let chain = radical_filtration(&ops)?;
    let mut terms = Vec::new();
    let mut polys = Vec::new();
    for basis in &chain.bases {
        let ps: Vec<_> = basis.vectors().map(|v| space.polynomial(v)).collect();
        let ambient: Vec<_> = ps
            .iter()
            .map(|p| space.ambient(p).expect("in space"))
            .collect();
        terms.push(EchelonBasis::from_vectors(&ambient));
        polys.push(ps);
    }
    Ok(LoewyDegree {
        space,
        terms,
        polys,
    })
}

/// Checks `F_i R_{k1} . F_j R_{k2} ⊆ F_{i+j} R_{k1+k2}` on every pair of
/// basis vectors; returns the first failing `(i, j)` if any.
pub fn multiplicativity_failure(
    spec: &FamilySpec,
    k1: u64,
    k2: u64,
    cap: u128,
) -> Result<Option<(usize, usize)>, OracleError> {
    let left = loewy_degree(spec, k1, cap)?;
    let right = loewy_degree(spec, k2, cap)?;
    let target = loewy_degree(spec, k1 + k2, cap)?;
    let zero = EchelonBasis::new();
    for (i, fi) in left.polys.iter().enumerate() {
        for (j, fj) in right.polys.iter().enumerate() {
            let span = target.terms.get(i + j).unwrap_or(&zero);
            for p in fi {
                for q in fj {
                    let inside = target
                        .space
                        .ambient(&p.mul(q))
                        .is_some_and(|v| span.contains(&v));
                    if !inside {
                        return Ok(Some((i, j)));
                    }
                }
            }
        }
    }
    Ok(None)
}

pub fn multiplicativity_check(
    spec: &FamilySpec,
    k1: u64,
    k2: u64,
    cap: u128,
) -> Result<bool, OracleError> {
    Ok(multiplicativity_failure(spec, k1, k2, cap)?.is_none())
}

/// `V_i` against `F_i` at one `(k, i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VanishingRow {
    pub k: u64,
    pub i: u64,
    pub vanishing_dim: u128,
    pub loewy_dim: u128,
    /// `V_i ⊆ F_i` as subspaces, not just by dimension.
    pub contained: bool,
}

impl VanishingRow {
    pub fn strict(&self) -> bool {
        self.vanishing_dim < self.loewy_dim
    }
}

pub fn vanishing_inclusion(
    spec: &FamilySpec,
    divisor: Divisor,
    k: u64,
    cap: u128,
) -> Result<Vec<VanishingRow>, OracleError> {
    let degree = loewy_degree(spec, k, cap)?;
    (0..degree.terms.len() as u64 - 1)
        .map(|i| {
            let basis = spec.vanishing_basis_for(divisor, k, i, cap)?;
            let span = &degree.terms[i as usize];
            let contained = basis
                .iter()
                .all(|p| degree.space.ambient(p).is_some_and(|v| span.contains(&v)));
            Ok(VanishingRow {
                k,
                i,
                vanishing_dim: spec.vanishing_dim_for(divisor, k, i)?,
                loewy_dim: span.rank() as u128,
                contained,
            })
        })
        .collect()
}
