//! Float evaluators for polynomial frames, used in the numerical inner loops.

use nalgebra::DMatrix;

use super::polynomial::rational_to_f64;
use super::{PolyVectorField, Polynomial};

#[derive(Clone, Debug)]
struct Term {
    coef: f64,
    /// (variable, power) with power ≥ 1
    factors: Vec<(usize, u32)>,
}

#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<Term>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| Term {
                coef: rational_to_f64(c),
                factors: m
                    .exponents()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e))
                    .collect(),
            })
            .collect();
        CompiledPoly { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let mut v = t.coef;
            for &(i, e) in &t.factors {
                v *= if e == 1 { x[i] } else { x[i].powi(e as i32) };
            }
            acc += v;
        }
        acc
    }
}

/// A list of vector fields on `R^n` evaluated in floating point.
#[derive(Clone, Debug)]
pub struct CompiledFrame {
    n: usize,
    fields: Vec<Vec<CompiledPoly>>,
}

impl CompiledFrame {
    pub fn new(fields: &[PolyVectorField]) -> Self {
        let n = fields.first().map_or(0, PolyVectorField::num_vars);
        CompiledFrame {
            n,
            fields: fields
                .iter()
                .map(|f| f.components().iter().map(CompiledPoly::new).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn field(&self, j: usize, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.fields[j]) {
            *o = c.eval(x);
        }
    }

    /// `out = Σ_j t_j X_j(x)`.
    pub fn combo(&self, t: &[f64], x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (tj, f) in t.iter().zip(&self.fields) {
            if *tj == 0.0 {
                continue;
            }
            for (o, c) in out.iter_mut().zip(f) {
                *o += tj * c.eval(x);
            }
        }
    }

    /// Matrix whose columns are the fields at `x`.
    pub fn matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.fields.len());
        for (j, f) in self.fields.iter().enumerate() {
            for (i, c) in f.iter().enumerate() {
                m[(i, j)] = c.eval(x);
            }
        }
        m
    }
}
