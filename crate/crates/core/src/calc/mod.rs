//! Exact multivariate polynomial calculus: vector fields, forms, brackets and
//! exterior derivatives over rational coefficients.

mod compiled;
mod field;
mod form;
pub mod identities;
pub mod json;
pub mod random;
mod point;
mod polynomial;
mod ratmat;

#[cfg(test)]
pub(crate) mod testing;

pub use compiled::{CompiledFrame, CompiledPoly};
pub use field::{divergence, evaluate_field, lie_bracket, PolyVectorField};
pub use form::{
    combinations, divergence_multivector, exterior_derivative, interior_product, MultiIndex,
    Multivector, PolyForm,
};
pub use identities::{check_structure_identities, CheckStatus, IdentityCheck, IdentityReport};
pub use point::Point;
pub use polynomial::{f64_to_rational, rational_to_f64, Monomial, Polynomial};
pub use ratmat::RatMatrix;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CalcError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty vector field")]
    Empty,
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("exterior derivative of a top-degree form (degree {0})")]
    TopDegree(usize),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("bad multi-index {0:?}")]
    BadMultiIndex(Vec<usize>),
    #[error("parse error: {0}")]
    Parse(String),
}

/// `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
