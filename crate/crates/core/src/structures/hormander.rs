use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use super::complemented::Distribution;
use super::StructureError;
use crate::calc::{Monomial, Point, PolyVectorField, RatMatrix, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum HormanderResult {
    Step { step: usize },
    /// Commutators of length ≤ `max_step` span only a `rank`-dimensional space.
    NotGenerating { max_step: usize, rank: usize },
}

/// Keeps a basis of the real span of polynomial fields by exact elimination on
/// their coefficient vectors.
struct FieldSpan {
    index: BTreeMap<(usize, Monomial), usize>,
    columns: Vec<Vec<(usize, Rational)>>,
    rank: usize,
}

impl FieldSpan {
    fn new() -> Self {
        FieldSpan {
            index: BTreeMap::new(),
            columns: Vec::new(),
            rank: 0,
        }
    }

    /// Adds `f` if it is not in the span of the fields kept so far.
    fn insert(&mut self, f: &PolyVectorField) -> bool {
        if f.is_zero() {
            return false;
        }
        let mut col = Vec::new();
        for (c, p) in f.components().iter().enumerate() {
            for (m, v) in p.terms() {
                let next = self.index.len();
                let row = *self.index.entry((c, m.clone())).or_insert(next);
                col.push((row, v.clone()));
            }
        }
        self.columns.push(col);
        let rows = self.index.len();
        let dense: Vec<Vec<Rational>> = self
            .columns
            .iter()
            .map(|c| {
                let mut v = vec![Rational::zero(); rows];
                for (r, x) in c {
                    v[*r] = x.clone();
                }
                v
            })
            .collect();
        let rank = RatMatrix::from_columns(&dense).rank();
        if rank > self.rank {
            self.rank = rank;
            true
        } else {
            self.columns.pop();
            false
        }
    }
}

/// Smallest `N` such that commutators of length ≤ `N` span `R^n` at `x`.
pub fn hormander_step(d: &Distribution, x: &Point, max_step: usize) -> Result<HormanderResult, StructureError> {
    if max_step == 0 {
        return Err(StructureError::Invalid("max_step must be at least 1".into()));
    }
    if x.dim() != d.n() {
        return Err(StructureError::Invalid(format!("point of dimension {} in R^{}", x.dim(), d.n())));
    }
    let xe = x.to_exact()?;
    let n = d.n();
    let mut span = FieldSpan::new();
    let mut values: Vec<Vec<Rational>> = Vec::new();
    let mut level: Vec<PolyVectorField> = Vec::new();
    for f in d.frame() {
        if span.insert(f) {
            values.push(f.eval_exact(&xe)?);
            level.push(f.clone());
        }
    }
    let mut rank = RatMatrix::from_columns(&values).rank();
    for step in 1..=max_step {
        if rank == n {
            return Ok(HormanderResult::Step { step });
        }
        if step == max_step || level.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for g in d.frame() {
            for y in &level {
                let b = g.bracket(y)?;
                if span.insert(&b) {
                    values.push(b.eval_exact(&xe)?);
                    next.push(b);
                }
            }
        }
        rank = RatMatrix::from_columns(&values).rank();
        level = next;
    }
    Ok(HormanderResult::NotGenerating { max_step, rank })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calc::rat;
    use crate::structures::build_catalog_model;

    #[test]
    fn catalog_steps() {
        let h = build_catalog_model("heisenberg1").unwrap();
        let r = hormander_step(h.structure().distribution(), &Point::origin_exact(3), 5).unwrap();
        assert_eq!(r, HormanderResult::Step { step: 2 });
        let f = build_catalog_model("free33").unwrap();
        let r = hormander_step(f.structure().distribution(), &Point::origin_exact(14), 5).unwrap();
        assert_eq!(r, HormanderResult::Step { step: 3 });
        let e = build_catalog_model("engel").unwrap();
        let x = Point::Float(vec![0.5, -0.25, 1.0, 2.0]);
        assert_eq!(hormander_step(e.structure().distribution(), &x, 5).unwrap(), HormanderResult::Step { step: 3 });
    }

    #[test]
    fn flat_distribution_fails() {
        let d = Distribution::new("flat", vec![PolyVectorField::coordinate(3, 0), PolyVectorField::coordinate(3, 1)]).unwrap();
        for m in [1, 2, 7] {
            let r = hormander_step(&d, &Point::Exact(vec![rat(1, 3); 3]), m).unwrap();
            assert_eq!(r, HormanderResult::NotGenerating { max_step: m, rank: 2 });
        }
    }

    #[test]
    fn step_capped() {
        let f = build_catalog_model("free33").unwrap();
        let r = hormander_step(f.structure().distribution(), &Point::origin_exact(14), 2).unwrap();
        assert_eq!(r, HormanderResult::NotGenerating { max_step: 2, rank: 6 });
    }
}
