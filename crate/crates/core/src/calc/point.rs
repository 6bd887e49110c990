use std::fmt;

use super::polynomial::{f64_to_rational, rational_to_f64};
use super::{CalcError, Rational};

/// Evaluation point (or evaluated vector) in exact or floating arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

impl Point {
    pub fn origin_exact(n: usize) -> Self {
        Point::Exact(vec![Rational::from_integer(0.into()); n])
    }

    pub fn dim(&self) -> usize {
        match self {
            Point::Exact(v) => v.len(),
            Point::Float(v) => v.len(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Point::Exact(_))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Point::Exact(v) => v.iter().map(rational_to_f64).collect(),
            Point::Float(v) => v.clone(),
        }
    }

    /// Exact coordinates. Float coordinates convert without rounding.
    pub fn to_exact(&self) -> Result<Vec<Rational>, CalcError> {
        match self {
            Point::Exact(v) => Ok(v.clone()),
            Point::Float(v) => v.iter().map(|&x| f64_to_rational(x)).collect(),
        }
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point::Float(v)
    }
}

impl From<Vec<Rational>> for Point {
    fn from(v: Vec<Rational>) -> Self {
        Point::Exact(v)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Exact(v) => {
                let s: Vec<String> = v.iter().map(|r| r.to_string()).collect();
                write!(f, "({})", s.join(", "))
            }
            Point::Float(v) => {
                let s: Vec<String> = v.iter().map(|r| r.to_string()).collect();
                write!(f, "({})", s.join(", "))
            }
        }
    }
}
