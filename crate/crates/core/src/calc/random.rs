//! Seeded random polynomial instances with small rational coefficients.

use rand::Rng;

use super::{rat, MultiIndex, PolyForm, PolyVectorField, Polynomial};

/// Up to `terms` monomials of total degree at most `max_degree`, coefficients `p/q`
/// with `|p| ≤ 5`, `1 ≤ q ≤ 3`.
pub fn random_polynomial(rng: &mut impl Rng, n: usize, terms: usize, max_degree: u32) -> Polynomial {
    let mut out = Polynomial::zero(n);
    for _ in 0..rng.random_range(0..=terms) {
        let mut exps = vec![0u32; n];
        let deg = rng.random_range(0..=max_degree);
        for _ in 0..deg {
            exps[rng.random_range(0..n)] += 1;
        }
        let c = rat(rng.random_range(-5..=5), rng.random_range(1..=3));
        out.add_term(super::Monomial::new(exps), c);
    }
    out
}

pub fn random_field(rng: &mut impl Rng, n: usize, terms: usize, max_degree: u32) -> PolyVectorField {
    PolyVectorField::new((0..n).map(|_| random_polynomial(rng, n, terms, max_degree)).collect())
        .expect("components share the variable count")
}

/// A random `degree`-form in `n` variables, one random coefficient per basis element.
pub fn random_form(rng: &mut impl Rng, n: usize, degree: usize, terms: usize, max_degree: u32) -> PolyForm {
    let coeffs: Vec<(MultiIndex, Polynomial)> = super::combinations(n, degree)
        .into_iter()
        .map(|idx| (idx, random_polynomial(rng, n, terms, max_degree)))
        .collect();
    PolyForm::from_coefficients(n, degree, coeffs).expect("sorted basis indices")
}
