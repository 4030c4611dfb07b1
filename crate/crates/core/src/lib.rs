//! Exact invariants of the Loewy filtration on the co-ordinate rings of
//! polarised varieties whose automorphism group is not reductive.
//!
//! The crate computes Hilbert, weight and trace-squared series of graded
//! layer profiles, fits them to polynomials, derives the Donaldson-Futaki
//! invariant and norm, and checks the closed-form layer dimensions of every
//! catalog family against a brute-force oracle that row-reduces the action of
//! the unipotent radical on explicit section bases.
//!
//! The algebra (`ratpoly`, `linalg`, `sections`, `profiles`, `oracle`) is
//! generic over [`Scalar`]; the catalog and the command-line tool use the
//! exact [`Rational`] instantiation.

pub mod families;
pub mod linalg;
pub mod oracle;
pub mod profiles;
pub mod ratpoly;
pub mod rees;
pub mod scalar;
pub mod sections;

pub use families::{ClosedForm, Divisor, FamilyError, FamilyKind, FamilySpec};
pub use oracle::{OperatorSet, OracleError, SubspaceChain};
pub use profiles::{DfReport, GradedProfile, Orientation, ProfileError, SeriesFit};
pub use ratpoly::{Polynomial, RatPolyError};
pub use scalar::{int, parse_rational, rat, Scalar};

/// Arbitrary-precision rational, always in lowest terms.
pub type Rational = num_rational::BigRational;
/// Polynomial with exact rational coefficients.
pub type RatPoly = Polynomial<Rational>;
pub type RatSeriesFit = SeriesFit<Rational>;
pub type RatDfReport = DfReport<Rational>;
pub type RatOperatorSet = OperatorSet<Rational>;
pub type F64Poly = Polynomial<f64>;
