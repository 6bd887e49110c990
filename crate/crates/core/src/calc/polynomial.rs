use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{CalcError, Rational};

/// Exponent vector of a monomial, ordered graded-lexicographically.
///
/// Total degree is compared first; ties are broken lexicographically with the
/// first variable most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(num_vars: usize) -> Self {
        Monomial(vec![0; num_vars])
    }

    pub fn var(num_vars: usize, i: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial with exact rational coefficients.
///
/// Terms live in a map keyed by [`Monomial`], so there are never duplicate
/// exponent vectors, and zero coefficients are dropped on every write. Two
/// polynomials are equal iff their term maps are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    num_vars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(num_vars: usize) -> Self {
        Polynomial {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(num_vars: usize) -> Self {
        Self::constant(num_vars, Rational::one())
    }

    pub fn constant(num_vars: usize, c: Rational) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(Monomial::one(num_vars), c);
        p
    }

    /// The coordinate function `x_i` (0-based).
    pub fn var(num_vars: usize, i: usize) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(Monomial::var(num_vars, i), Rational::one());
        p
    }

    pub fn from_int(num_vars: usize, c: i64) -> Self {
        Self::constant(num_vars, Rational::from_integer(BigInt::from(c)))
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs, merging duplicates.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self, CalcError>
    where
        I: IntoIterator<Item = (Rational, Vec<u32>)>,
    {
        let mut p = Self::zero(num_vars);
        for (c, e) in terms {
            if e.len() != num_vars {
                return Err(CalcError::DimensionMismatch {
                    expected: num_vars,
                    found: e.len(),
                });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Constant term.
    pub fn constant_term(&self) -> Rational {
        self.coefficient(&vec![0; self.num_vars])
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        debug_assert_eq!(m.0.len(), self.num_vars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.num_vars);
        }
        Polynomial {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Partial derivative with respect to `x_i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.num_vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut d = m.0.clone();
            d[i] -= 1;
            out.add_term(Monomial(d), c * Rational::from_integer(BigInt::from(e)));
        }
        out
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.num_vars).map(|i| self.derivative(i)).collect()
    }

    pub fn eval_exact(&self, x: &[Rational]) -> Result<Rational, CalcError> {
        self.check_len(x.len())?;
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(xi.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<f64, CalcError> {
        self.check_len(x.len())?;
        Ok(self.terms.iter().fold(0.0, |acc, (m, c)| {
            let mut t = rational_to_f64(c);
            for (xi, &e) in x.iter().zip(&m.0) {
                if e > 0 {
                    t *= xi.powi(e as i32);
                }
            }
            acc + t
        }))
    }

    fn check_len(&self, len: usize) -> Result<(), CalcError> {
        if len != self.num_vars {
            return Err(CalcError::DimensionMismatch {
                expected: self.num_vars,
                found: len,
            });
        }
        Ok(())
    }

    fn assert_compatible(&self, other: &Polynomial) {
        assert_eq!(
            self.num_vars, other.num_vars,
            "polynomials over different numbers of variables"
        );
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact rational value of a finite `f64` (every finite double is dyadic).
pub fn f64_to_rational(x: f64) -> Result<Rational, CalcError> {
    Rational::from_float(x).ok_or(CalcError::NonFinite(x))
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.assert_compatible(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.assert_compatible(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.assert_compatible(rhs);
        let mut out = Polynomial::zero(self.num_vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let is_const = m.degree() == 0;
            if !abs.is_one() || is_const {
                write!(f, "{abs}")?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut first_var = true;
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first_var {
                    write!(f, "*")?;
                }
                first_var = false;
                write!(f, "x{}", i + 1)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn zero_terms_are_dropped() {
        let x = Polynomial::var(2, 0);
        let p = &x - &x;
        assert!(p.is_zero());
        assert_eq!(p, Polynomial::zero(2));
    }

    #[test]
    fn grlex_orders_by_degree_then_lex() {
        let a = Monomial::new(vec![0, 2]);
        let b = Monomial::new(vec![1, 0]);
        let c = Monomial::new(vec![1, 1]);
        assert!(b < a);
        assert!(c > b);
        assert!(Monomial::new(vec![2, 0]) > c);
    }

    #[test]
    fn structural_equality_is_order_independent() {
        let p = Polynomial::from_terms(2, vec![(q(1, 2), vec![1, 0]), (q(3, 1), vec![0, 2])]).unwrap();
        let r = Polynomial::from_terms(2, vec![(q(3, 1), vec![0, 2]), (q(1, 2), vec![1, 0])]).unwrap();
        assert_eq!(p, r);
    }

    #[test]
    fn derivative_and_eval() {
        // p = x^2 y + 3y
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = &(&(&x * &x) * &y) + &y.scale(&q(3, 1));
        assert_eq!(p.derivative(0), (&x * &y).scale(&q(2, 1)));
        assert_eq!(p.eval_exact(&[q(2, 1), q(1, 3)]).unwrap(), q(7, 3));
        assert!((p.eval_f64(&[2.0, 1.0 / 3.0]).unwrap() - 7.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_wrong_dimension() {
        let p = Polynomial::var(3, 0);
        assert!(matches!(
            p.eval_f64(&[1.0, 2.0]),
            Err(CalcError::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn display_is_readable() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = &(&x * &y) - &y.scale(&q(1, 2));
        assert_eq!(p.to_string(), "x1*x2 - 1/2*x2");
    }
}
