use std::ops::{Add, Neg, Sub};

use super::polynomial::Polynomial;
use super::point::Point;
use super::{CalcError, Rational};

/// Vector field on `R^n` with polynomial components.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyVectorField {
    num_vars: usize,
    components: Vec<Polynomial>,
}

impl PolyVectorField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self, CalcError> {
        let n = components.len();
        if n == 0 {
            return Err(CalcError::Empty);
        }
        if let Some(bad) = components.iter().find(|c| c.num_vars() != n) {
            return Err(CalcError::DimensionMismatch {
                expected: n,
                found: bad.num_vars(),
            });
        }
        Ok(PolyVectorField {
            num_vars: n,
            components,
        })
    }

    pub fn zero(n: usize) -> Self {
        PolyVectorField {
            num_vars: n,
            components: vec![Polynomial::zero(n); n],
        }
    }

    /// Constant coordinate field `∂/∂x_i` (0-based).
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut f = Self::zero(n);
        f.components[i] = Polynomial::one(n);
        f
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Polynomial {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|p| p.scale(c))
    }

    /// Pointwise product `f·X`.
    pub fn mul_poly(&self, f: &Polynomial) -> Self {
        self.map(|p| f * p)
    }

    fn map(&self, op: impl Fn(&Polynomial) -> Polynomial) -> Self {
        PolyVectorField {
            num_vars: self.num_vars,
            components: self.components.iter().map(op).collect(),
        }
    }

    fn check_same(&self, other: &Self) -> Result<(), CalcError> {
        if self.num_vars != other.num_vars {
            return Err(CalcError::DimensionMismatch {
                expected: self.num_vars,
                found: other.num_vars,
            });
        }
        Ok(())
    }

    /// Directional derivative `X(f) = Σ X_i ∂_i f`.
    pub fn apply(&self, f: &Polynomial) -> Result<Polynomial, CalcError> {
        if f.num_vars() != self.num_vars {
            return Err(CalcError::DimensionMismatch {
                expected: self.num_vars,
                found: f.num_vars(),
            });
        }
        let mut acc = Polynomial::zero(self.num_vars);
        for (i, xi) in self.components.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            let d = f.derivative(i);
            if !d.is_zero() {
                acc = &acc + &(xi * &d);
            }
        }
        Ok(acc)
    }

    /// Lie bracket with the convention `[X,Y]^j = Σ_i (X_i ∂_i Y^j − Y_i ∂_i X^j)`.
    pub fn bracket(&self, other: &Self) -> Result<Self, CalcError> {
        self.check_same(other)?;
        let mut components = Vec::with_capacity(self.num_vars);
        for j in 0..self.num_vars {
            let a = self.apply(&other.components[j])?;
            let b = other.apply(&self.components[j])?;
            components.push(&a - &b);
        }
        Ok(PolyVectorField {
            num_vars: self.num_vars,
            components,
        })
    }

    /// `Σ ∂X_i/∂x_i`.
    pub fn divergence(&self) -> Polynomial {
        self.components
            .iter()
            .enumerate()
            .fold(Polynomial::zero(self.num_vars), |acc, (i, p)| {
                &acc + &p.derivative(i)
            })
    }

    /// Euclidean pairing `⟨∇f, X⟩`, identical to [`apply`](Self::apply).
    pub fn pair_gradient(&self, f: &Polynomial) -> Result<Polynomial, CalcError> {
        self.apply(f)
    }

    pub fn evaluate(&self, x: &Point) -> Result<Point, CalcError> {
        if x.dim() != self.num_vars {
            return Err(CalcError::DimensionMismatch {
                expected: self.num_vars,
                found: x.dim(),
            });
        }
        match x {
            Point::Exact(c) => self
                .components
                .iter()
                .map(|p| p.eval_exact(c))
                .collect::<Result<Vec<_>, _>>()
                .map(Point::Exact),
            Point::Float(c) => self
                .components
                .iter()
                .map(|p| p.eval_f64(c))
                .collect::<Result<Vec<_>, _>>()
                .map(Point::Float),
        }
    }

    pub fn eval_exact(&self, x: &[Rational]) -> Result<Vec<Rational>, CalcError> {
        self.components.iter().map(|p| p.eval_exact(x)).collect()
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>, CalcError> {
        self.components.iter().map(|p| p.eval_f64(x)).collect()
    }
}

/// Evaluates a vector field at a point.
pub fn evaluate_field(field: &PolyVectorField, x: &Point) -> Result<Point, CalcError> {
    field.evaluate(x)
}

/// Standard-convention Lie bracket `[X, Y]`.
pub fn lie_bracket(x: &PolyVectorField, y: &PolyVectorField) -> Result<PolyVectorField, CalcError> {
    x.bracket(y)
}

pub fn divergence(x: &PolyVectorField) -> Polynomial {
    x.divergence()
}

impl Add for &PolyVectorField {
    type Output = PolyVectorField;
    fn add(self, rhs: &PolyVectorField) -> PolyVectorField {
        assert_eq!(self.num_vars, rhs.num_vars);
        PolyVectorField {
            num_vars: self.num_vars,
            components: self
                .components
                .iter()
                .zip(&rhs.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &PolyVectorField {
    type Output = PolyVectorField;
    fn sub(self, rhs: &PolyVectorField) -> PolyVectorField {
        assert_eq!(self.num_vars, rhs.num_vars);
        PolyVectorField {
            num_vars: self.num_vars,
            components: self
                .components
                .iter()
                .zip(&rhs.components)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &PolyVectorField {
    type Output = PolyVectorField;
    fn neg(self) -> PolyVectorField {
        self.map(|p| -p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calc::testing::{heisenberg_frame, q};

    #[test]
    fn evaluate_constant_part_at_origin() {
        let [x1, _] = heisenberg_frame();
        let v = x1.evaluate(&Point::Exact(vec![q(0, 1); 3])).unwrap();
        assert_eq!(v, Point::Exact(vec![q(1, 1), q(0, 1), q(0, 1)]));
    }

    #[test]
    fn evaluate_by_substitution() {
        let [_, x2] = heisenberg_frame();
        let v = x2
            .evaluate(&Point::Exact(vec![q(2, 1), q(5, 1), q(7, 1)]))
            .unwrap();
        assert_eq!(v, Point::Exact(vec![q(0, 1), q(1, 1), q(1, 1)]));
    }

    #[test]
    fn evaluate_quadratic_field() {
        // (x², xy) at (3,4): hand evaluation gives (9, 12)
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let f = PolyVectorField::new(vec![&x * &x, &x * &y]).unwrap();
        assert_eq!(f.eval_f64(&[3.0, 4.0]).unwrap(), vec![9.0, 12.0]);
        assert_eq!(
            f.eval_exact(&[q(3, 1), q(4, 1)]).unwrap(),
            vec![q(9, 1), q(12, 1)]
        );
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let [x1, _] = heisenberg_frame();
        assert!(x1.evaluate(&Point::Float(vec![0.0, 0.0])).is_err());
    }

    #[test]
    fn constant_fields_commute() {
        let dx = PolyVectorField::coordinate(2, 0);
        let dy = PolyVectorField::coordinate(2, 1);
        assert!(dx.bracket(&dy).unwrap().is_zero());
    }

    #[test]
    fn heisenberg_bracket_is_vertical() {
        let [x1, x2] = heisenberg_frame();
        assert_eq!(x1.bracket(&x2).unwrap(), PolyVectorField::coordinate(3, 2));
    }

    #[test]
    fn bracket_of_linear_fields() {
        // [x∂y, y∂x] expanded by hand: x∂x − y∂y
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let z = Polynomial::zero(2);
        let a = PolyVectorField::new(vec![z.clone(), x.clone()]).unwrap();
        let b = PolyVectorField::new(vec![y.clone(), z]).unwrap();
        let expected = PolyVectorField::new(vec![x, -&y]).unwrap();
        assert_eq!(a.bracket(&b).unwrap(), expected);
    }

    #[test]
    fn divergence_examples() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let radial = PolyVectorField::new(vec![x.clone(), y.clone()]).unwrap();
        assert_eq!(radial.divergence(), Polynomial::from_int(2, 2));
        assert!(PolyVectorField::coordinate(2, 1).divergence().is_zero());
        let f = PolyVectorField::new(vec![&x * &x, &x * &y]).unwrap();
        assert_eq!(f.divergence(), x.scale(&q(3, 1)));
    }
}
