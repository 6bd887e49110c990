//! Exact checks of the bracket/divergence/differential identities.
//!
//! With the bracket convention of [`PolyVectorField::bracket`] and the interior
//! product `X∧Y ⌟ ω = ω(X)Y − ω(Y)X`, exact expansion gives
//!
//! ```text
//! −div(X∧Y ⌟ ω) = dω(X∧Y) − ω(X) div Y + ω(Y) div X + ω([X,Y])
//! ```
//!
//! and therefore `dω(X∧Y) = −ω([X,Y])` whenever `ω(X) = ω(Y) = 0`.

use serde::Serialize;

use super::field::PolyVectorField;
use super::form::{interior_product, Multivector, PolyForm};
use super::polynomial::Polynomial;
use super::CalcError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    ExactPass,
    Fail,
    /// Hypotheses of the identity do not hold for the given inputs.
    NotApplicable,
}

#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub status: CheckStatus,
    /// `lhs − rhs` as exact polynomials, one entry per component.
    pub residual: Vec<Polynomial>,
}

#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.status != CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const WEIGHTED_COMMUTATOR: &str = "weighted-commutator";
pub const DIVERGENCE: &str = "divergence";
pub const ANNIHILATOR: &str = "annihilator";

fn check(name: &'static str, residual: Vec<Polynomial>) -> IdentityCheck {
    let status = if residual.iter().all(Polynomial::is_zero) {
        CheckStatus::ExactPass
    } else {
        CheckStatus::Fail
    };
    IdentityCheck {
        name,
        status,
        residual,
    }
}

/// `[fX, gY] − (fg[X,Y] + f⟨∇g,X⟩Y − g⟨∇f,Y⟩X)`.
pub fn weighted_commutator_residual(
    x: &PolyVectorField,
    y: &PolyVectorField,
    f: &Polynomial,
    g: &Polynomial,
) -> Result<PolyVectorField, CalcError> {
    let lhs = x.mul_poly(f).bracket(&y.mul_poly(g))?;
    let fg = f * g;
    let rhs = &(&x.bracket(y)?.mul_poly(&fg) + &y.mul_poly(&(f * &x.apply(g)?)))
        - &x.mul_poly(&(g * &y.apply(f)?));
    Ok(&lhs - &rhs)
}

/// `−div(X∧Y⌟ω) − (dω(X∧Y) − ω(X)divY + ω(Y)divX + ω([X,Y]))`.
pub fn divergence_identity_residual(
    x: &PolyVectorField,
    y: &PolyVectorField,
    omega: &PolyForm,
) -> Result<Polynomial, CalcError> {
    let xy = Multivector::wedge_fields(&[x.clone(), y.clone()])?;
    let contracted = interior_product(&xy, omega)?.to_field()?;
    let lhs = -contracted.divergence();
    let d_omega = omega.exterior_derivative()?.evaluate_on(&xy)?;
    let wx = omega.apply_field(x)?;
    let wy = omega.apply_field(y)?;
    let w_br = omega.apply_field(&x.bracket(y)?)?;
    let rhs = &(&(&d_omega - &(&wx * &y.divergence())) + &(&wy * &x.divergence())) + &w_br;
    Ok(&lhs - &rhs)
}

/// Residual of `dω(X∧Y) + ω([X,Y])`, or `None` unless `ω(X) = ω(Y) = 0`.
pub fn annihilator_identity_residual(
    x: &PolyVectorField,
    y: &PolyVectorField,
    omega: &PolyForm,
) -> Result<Option<Polynomial>, CalcError> {
    if !omega.apply_field(x)?.is_zero() || !omega.apply_field(y)?.is_zero() {
        return Ok(None);
    }
    let xy = Multivector::wedge_fields(&[x.clone(), y.clone()])?;
    let d_omega = omega.exterior_derivative()?.evaluate_on(&xy)?;
    let w_br = omega.apply_field(&x.bracket(y)?)?;
    Ok(Some(&d_omega + &w_br))
}

/// Evaluates the weighted-commutator, divergence and annihilator identities.
///
/// Failures are reported in the returned value, never as errors; the only
/// errors are malformed inputs (mismatched dimensions, `ω` not a 1-form).
pub fn check_structure_identities(
    x: &PolyVectorField,
    y: &PolyVectorField,
    f: &Polynomial,
    g: &Polynomial,
    omega: &PolyForm,
) -> Result<IdentityReport, CalcError> {
    if omega.degree() != 1 {
        return Err(CalcError::DegreeMismatch(format!(
            "identities need a 1-form, found degree {}",
            omega.degree()
        )));
    }
    let n = x.num_vars();
    for d in [y.num_vars(), f.num_vars(), g.num_vars(), omega.num_vars()] {
        if d != n {
            return Err(CalcError::DimensionMismatch { expected: n, found: d });
        }
    }
    let wc = weighted_commutator_residual(x, y, f, g)?;
    let mut checks = vec![
        check(WEIGHTED_COMMUTATOR, wc.components().to_vec()),
        check(DIVERGENCE, vec![divergence_identity_residual(x, y, omega)?]),
    ];
    checks.push(match annihilator_identity_residual(x, y, omega)? {
        Some(r) => check(ANNIHILATOR, vec![r]),
        None => IdentityCheck {
            name: ANNIHILATOR,
            status: CheckStatus::NotApplicable,
            residual: vec![Polynomial::zero(n)],
        },
    });
    Ok(IdentityReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calc::testing::{heisenberg_annihilator, heisenberg_frame};

    #[test]
    fn heisenberg_annihilator_values() {
        let [x1, x2] = heisenberg_frame();
        let w = heisenberg_annihilator();
        let xy = Multivector::wedge_fields(&[x1.clone(), x2.clone()]).unwrap();
        let dw = w.exterior_derivative().unwrap().evaluate_on(&xy).unwrap();
        assert_eq!(dw, Polynomial::from_int(3, -1));
        let wb = w.apply_field(&x1.bracket(&x2).unwrap()).unwrap();
        assert_eq!(wb, Polynomial::from_int(3, 1));
        let report = check_structure_identities(
            &x1,
            &x2,
            &Polynomial::one(3),
            &Polynomial::one(3),
            &w,
        )
        .unwrap();
        assert!(report.all_pass());
        assert_eq!(report.get(ANNIHILATOR).unwrap().status, CheckStatus::ExactPass);
    }

    #[test]
    fn unit_weights_reduce_to_bilinearity() {
        let [x1, x2] = heisenberg_frame();
        let r = weighted_commutator_residual(&x1, &x2, &Polynomial::one(3), &Polynomial::one(3)).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn opposite_sign_divergence_variant_fails() {
        // The variant dω(X∧Y) + ω(X)divY − ω(Y)divX − ω([X,Y]) is not an identity:
        // X = ∂x, Y = x∂y, ω = dy gives −div(X∧Y⌟ω) = 1 but the variant is −1.
        let n = 2;
        let x = crate::calc::PolyVectorField::coordinate(n, 0);
        let y = crate::calc::PolyVectorField::new(vec![Polynomial::zero(n), Polynomial::var(n, 0)]).unwrap();
        let w = PolyForm::basis(n, vec![1]).unwrap();
        let xy = Multivector::wedge_fields(&[x.clone(), y.clone()]).unwrap();
        let lhs = -interior_product(&xy, &w).unwrap().to_field().unwrap().divergence();
        let d_omega = w.exterior_derivative().unwrap().evaluate_on(&xy).unwrap();
        let variant = &(&(&d_omega + &(&w.apply_field(&x).unwrap() * &y.divergence()))
            - &(&w.apply_field(&y).unwrap() * &x.divergence()))
            - &w.apply_field(&x.bracket(&y).unwrap()).unwrap();
        assert_eq!(lhs, Polynomial::one(n));
        assert_eq!(variant, Polynomial::from_int(n, -1));
        assert!(divergence_identity_residual(&x, &y, &w).unwrap().is_zero());
    }

    #[test]
    fn annihilator_check_skips_non_annihilating_forms() {
        let [x1, x2] = heisenberg_frame();
        let w = PolyForm::basis(3, vec![0]).unwrap();
        let report = check_structure_identities(&x1, &x2, &Polynomial::one(3), &Polynomial::one(3), &w).unwrap();
        assert_eq!(report.get(ANNIHILATOR).unwrap().status, CheckStatus::NotApplicable);
        assert_eq!(report.get(DIVERGENCE).unwrap().status, CheckStatus::ExactPass);
    }
}
