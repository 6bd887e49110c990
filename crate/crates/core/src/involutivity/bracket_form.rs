use nalgebra::DMatrix;
use num_traits::Zero;

use super::InvolutivityError;
use crate::calc::{combinations, rational_to_f64, Point, RatMatrix, Rational};
use crate::structures::{ComplementedStructure, StructureError};

/// `B_x(e_i, e_j)`: the complement coordinates of `[X_i, X_j](x)` modulo `V(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketForm {
    pub point: Vec<Rational>,
    pub k: usize,
    /// One antisymmetric `k×k` matrix per complement direction.
    pub matrices: Vec<RatMatrix>,
    /// Rows `k..n` of the inverse frame matrix: covectors vanishing on `V(x)`,
    /// dual to the complement fields.
    pub annihilators: Vec<Vec<Rational>>,
}

impl BracketForm {
    pub fn codim(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.matrices.iter().all(RatMatrix::is_zero)
    }

    pub fn float_matrices(&self) -> Vec<DMatrix<f64>> {
        self.matrices.iter().map(RatMatrix::to_f64).collect()
    }

    /// `B(u, v)` for frame-coordinate vectors.
    pub fn eval(&self, u: &[Rational], v: &[Rational]) -> Vec<Rational> {
        self.matrices
            .iter()
            .map(|m| {
                let mv = m.mul_vec(v);
                u.iter().zip(&mv).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Bracket form of the frame `Y_b = Σ_a G[a][b] X_a`: each matrix becomes `Gᵀ M G`.
    pub fn transform(&self, g: &RatMatrix) -> BracketForm {
        let gt = g.transpose();
        BracketForm {
            point: self.point.clone(),
            k: self.k,
            matrices: self.matrices.iter().map(|m| gt.mul(m).mul(g)).collect(),
            annihilators: self.annihilators.clone(),
        }
    }

    /// The map `β: Λ²R^k → R^{n−k}` in the basis `e_a∧e_b`, `a < b`.
    pub fn beta(&self) -> RatMatrix {
        let pairs = combinations(self.k, 2);
        let mut m = RatMatrix::zeros(self.codim(), pairs.len());
        for (c, p) in pairs.iter().enumerate() {
            for (l, ml) in self.matrices.iter().enumerate() {
                m[(l, c)] = ml[(p[0], p[1])].clone();
            }
        }
        m
    }

    /// `Σ_{a<b} |B(w_a, w_b)|²` for float frame-coordinate vectors.
    pub fn residual(&self, basis: &[Vec<f64>]) -> f64 {
        let mats = self.float_matrices();
        residual_f64(&mats, basis)
    }
}

pub(crate) fn residual_f64(mats: &[DMatrix<f64>], basis: &[Vec<f64>]) -> f64 {
    let mut acc = 0.0;
    for a in 0..basis.len() {
        for b in a + 1..basis.len() {
            for m in mats {
                let mut s = 0.0;
                for i in 0..basis[a].len() {
                    for j in 0..basis[b].len() {
                        s += basis[a][i] * m[(i, j)] * basis[b][j];
                    }
                }
                acc += s * s;
            }
        }
    }
    acc
}

pub fn bracket_form(s: &ComplementedStructure, x: &Point) -> Result<BracketForm, InvolutivityError> {
    if x.dim() != s.n() {
        return Err(StructureError::Invalid(format!("point of dimension {} in R^{}", x.dim(), s.n())).into());
    }
    let xe = x.to_exact()?;
    let f = s.frame_matrix_exact(&xe)?;
    let finv = f
        .inverse()
        .ok_or_else(|| StructureError::SingularFrame(xe.iter().map(rational_to_f64).collect()))?;
    let (n, k) = (s.n(), s.k());
    let mut matrices = vec![RatMatrix::zeros(k, k); n - k];
    let frame = s.frame();
    for i in 0..k {
        for j in i + 1..k {
            let b = frame[i].bracket(&frame[j])?.eval_exact(&xe)?;
            let coords = finv.mul_vec(&b);
            for (l, m) in matrices.iter_mut().enumerate() {
                let c = &coords[k + l];
                m[(i, j)] = c.clone();
                m[(j, i)] = -c.clone();
            }
        }
    }
    Ok(BracketForm {
        point: xe,
        k,
        matrices,
        annihilators: (k..n).map(|r| finv.row(r)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calc::rat;
    use crate::structures::build_catalog_model;

    #[test]
    fn heisenberg_form() {
        let h = build_catalog_model("heisenberg1").unwrap();
        let b = bracket_form(h.structure(), &Point::Float(vec![0.5, -2.0, 3.0])).unwrap();
        assert_eq!(b.codim(), 1);
        let expected = RatMatrix::from_rows(&[vec![rat(0, 1), rat(1, 1)], vec![rat(-1, 1), rat(0, 1)]]);
        assert_eq!(b.matrices[0], expected);
    }

    #[test]
    fn free33_v6_form_at_origin() {
        let m = build_catalog_model("free33_v6").unwrap();
        let b = bracket_form(m.structure(), &Point::origin_exact(14)).unwrap();
        assert_eq!(b.codim(), 8);
        // complement direction 0 is X7 = [X1,X4]
        let x7 = &b.matrices[0];
        for i in 0..6 {
            for j in 0..6 {
                let v = if (i, j) == (0, 3) { rat(1, 1) } else if (i, j) == (3, 0) { rat(-1, 1) } else { rat(0, 1) };
                assert_eq!(x7[(i, j)], v, "({i},{j})");
            }
        }
        for l in 0..8 {
            for i in 0..3 {
                for j in 0..3 {
                    assert!(b.matrices[l][(i, j)].is_zero());
                }
            }
        }
    }
}
