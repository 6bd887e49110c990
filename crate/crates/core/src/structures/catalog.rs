use num_traits::Zero;

use super::complemented::{ComplementedStructure, Distribution, Recipe};
use super::StructureError;
use crate::calc::{rat, CheckStatus, PolyVectorField, Polynomial, Rational};

pub const CATALOG_NAMES: [&str; 5] = ["heisenberg1", "heisenberg_d", "engel", "free33", "free33_v6"];
const CATALOG_BOX: [f64; 2] = [-4.0, 4.0];
const HEISENBERG_D_DEFAULT: usize = 2;

/// Nilpotent Lie algebra given by structure constants on a graded basis.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    degrees: Vec<u32>,
    /// `c[i][j][l]` is the `e_l` coefficient of `[e_i, e_j]`.
    c: Vec<Vec<Vec<Rational>>>,
}

type Relation<'a> = (usize, usize, &'a [(usize, i64)]);

impl LieAlgebra {
    /// Builds the algebra from relations `[e_i, e_j] = Σ c_l e_l` (0-based,
    /// `i < j`); unlisted brackets vanish.
    pub fn from_relations(degrees: Vec<u32>, relations: &[Relation<'_>]) -> Result<Self, StructureError> {
        let dim = degrees.len();
        let mut c = vec![vec![vec![Rational::zero(); dim]; dim]; dim];
        for &(i, j, combo) in relations {
            if i >= dim || j >= dim || i == j {
                return Err(StructureError::Invalid(format!("bad relation indices ({i}, {j})")));
            }
            for &(l, v) in combo {
                if l >= dim {
                    return Err(StructureError::Invalid(format!("bad basis index {l}")));
                }
                c[i][j][l] += rat(v, 1);
                c[j][i][l] -= rat(v, 1);
            }
        }
        Ok(LieAlgebra { dim, degrees, c })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn step(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn constant(&self, i: usize, j: usize, l: usize) -> &Rational {
        &self.c[i][j][l]
    }

    pub fn bracket(&self, u: &[Rational], v: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim];
        for (i, ui) in u.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, vj) in v.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                let w = ui * vj;
                for (l, c) in self.c[i][j].iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                    out[l] += &w * c;
                }
            }
        }
        out
    }

    fn basis(&self, i: usize) -> Vec<Rational> {
        let mut e = vec![Rational::zero(); self.dim];
        e[i] = rat(1, 1);
        e
    }

    /// Triples `i < j < l` where the Jacobi identity fails.
    pub fn jacobi_violations(&self) -> Vec<(usize, usize, usize)> {
        let mut bad = Vec::new();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for l in j + 1..self.dim {
                    let (a, b, c) = (self.basis(i), self.basis(j), self.basis(l));
                    let s1 = self.bracket(&a, &self.bracket(&b, &c));
                    let s2 = self.bracket(&b, &self.bracket(&c, &a));
                    let s3 = self.bracket(&c, &self.bracket(&a, &b));
                    if s1.iter().zip(&s2).zip(&s3).any(|((x, y), z)| !(x + y + z).is_zero()) {
                        bad.push((i, j, l));
                    }
                }
            }
        }
        bad
    }

    /// Whether every nonzero `c_ij^l` has `deg e_l ≥ deg e_i + deg e_j`.
    pub fn respects_grading(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| {
                (0..self.dim).all(|l| {
                    self.c[i][j][l].is_zero() || self.degrees[l] >= self.degrees[i] + self.degrees[j]
                })
            })
        })
    }

    /// `ad_x v = Σ_j x_j [e_j, v]` with `x` the coordinate functions.
    fn ad_x(&self, v: &[Polynomial]) -> Vec<Polynomial> {
        let n = self.dim;
        let mut out = vec![Polynomial::zero(n); n];
        for j in 0..n {
            let xj = Polynomial::var(n, j);
            for (m, vm) in v.iter().enumerate().filter(|(_, p)| !p.is_zero()) {
                let coeff = &xj * vm;
                for (l, c) in self.c[j][m].iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                    out[l] = &out[l] + &coeff.scale(c);
                }
            }
        }
        out
    }

    /// Left-invariant fields in exponential coordinates,
    /// `X_i(x) = e_i + ½ ad_x e_i + (1/12) ad_x² e_i`.
    pub fn left_invariant_fields(&self) -> Vec<PolyVectorField> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                let mut e = vec![Polynomial::zero(n); n];
                e[i] = Polynomial::one(n);
                let a1 = self.ad_x(&e);
                let a2 = self.ad_x(&a1);
                let comps = (0..n)
                    .map(|l| &(&e[l] + &a1[l].scale(&rat(1, 2))) + &a2[l].scale(&rat(1, 12)))
                    .collect();
                PolyVectorField::new(comps).expect("dimensions agree by construction")
            })
            .collect()
    }
}

/// Outcome of checking `[X_i, X_j] = Σ c_l X_l` as a polynomial identity.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationCheck {
    pub i: usize,
    pub j: usize,
    pub expected: Vec<(usize, Rational)>,
    pub status: CheckStatus,
}

#[derive(Clone, Debug)]
pub struct CarnotModel {
    pub name: String,
    algebra: LieAlgebra,
    generators: usize,
    fields: Vec<PolyVectorField>,
    structure: ComplementedStructure,
}

impl CarnotModel {
    fn new(name: &str, algebra: LieAlgebra, generators: usize, rank: usize) -> Result<Self, StructureError> {
        let violations = algebra.jacobi_violations();
        if !violations.is_empty() {
            return Err(StructureError::Invalid(format!(
                "structure constants violate the Jacobi identity at {violations:?}"
            )));
        }
        let fields = algebra.left_invariant_fields();
        let structure = sub_structure(name, &algebra, &fields, rank)?;
        Ok(CarnotModel {
            name: name.to_string(),
            algebra,
            generators,
            fields,
            structure,
        })
    }

    pub fn n(&self) -> usize {
        self.algebra.dim()
    }

    /// Rank of the distribution carried by [`structure`](Self::structure).
    pub fn k(&self) -> usize {
        self.structure.k()
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn step(&self) -> u32 {
        self.algebra.step()
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    /// All `n` left-invariant fields.
    pub fn fields(&self) -> &[PolyVectorField] {
        &self.fields
    }

    pub fn structure(&self) -> &ComplementedStructure {
        &self.structure
    }

    pub fn into_structure(self) -> ComplementedStructure {
        self.structure
    }

    /// Checks `[X_i, X_j] = Σ c_l X_l` exactly (0-based indices).
    pub fn check_relation(&self, i: usize, j: usize, expected: &[(usize, Rational)]) -> Result<RelationCheck, StructureError> {
        let br = self.fields[i].bracket(&self.fields[j])?;
        let rhs = expected.iter().fold(PolyVectorField::zero(self.n()), |acc, (l, c)| {
            &acc + &self.fields[*l].scale(c)
        });
        Ok(RelationCheck {
            i,
            j,
            expected: expected.to_vec(),
            status: if br == rhs { CheckStatus::ExactPass } else { CheckStatus::Fail },
        })
    }

    /// One check per nonzero bracket `[e_i, e_j]`, `i < j`.
    pub fn relation_checks(&self) -> Result<Vec<RelationCheck>, StructureError> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let expected: Vec<(usize, Rational)> = (0..n)
                    .filter(|&l| !self.algebra.constant(i, j, l).is_zero())
                    .map(|l| (l, self.algebra.constant(i, j, l).clone()))
                    .collect();
                if !expected.is_empty() {
                    out.push(self.check_relation(i, j, &expected)?);
                }
            }
        }
        Ok(out)
    }

    /// Every pair `i < j`, including the vanishing brackets.
    pub fn all_pairs_hold(&self) -> Result<bool, StructureError> {
        let n = self.n();
        for i in 0..n {
            for j in i + 1..n {
                let expected: Vec<(usize, Rational)> = (0..n)
                    .map(|l| (l, self.algebra.constant(i, j, l).clone()))
                    .filter(|(_, c)| !c.is_zero())
                    .collect();
                if self.check_relation(i, j, &expected)?.status != CheckStatus::ExactPass {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Frame `X_1..X_rank`; each remaining basis field must be a bracket
/// `[X_i, Y]` of a frame field with an earlier field, which gives its recipe.
fn sub_structure(
    name: &str,
    algebra: &LieAlgebra,
    fields: &[PolyVectorField],
    rank: usize,
) -> Result<ComplementedStructure, StructureError> {
    let n = algebra.dim();
    let mut recipes: Vec<Option<Recipe>> = (0..n).map(|i| (i < rank).then_some(Recipe::Leaf(i))).collect();
    for l in rank..n {
        let found = (0..rank).find_map(|i| {
            (0..l).find(|&j| {
                recipes[j].is_some()
                    && (0..n).all(|m| {
                        let c = algebra.constant(i, j, m);
                        if m == l { *c == rat(1, 1) } else { c.is_zero() }
                    })
            })
            .map(|j| Recipe::bracket(Recipe::Leaf(i), recipes[j].clone().unwrap()))
        });
        recipes[l] = Some(found.ok_or_else(|| {
            StructureError::InvalidRecipe(format!("basis field {} is not a bracket of earlier fields", l + 1))
        })?);
    }
    let dist = Distribution::new(name, fields[..rank].to_vec())?;
    let recipes: Vec<Recipe> = recipes.into_iter().skip(rank).map(Option::unwrap).collect();
    let s = ComplementedStructure::from_recipes(dist, recipes, CATALOG_BOX)?;
    if s.complement() != &fields[rank..] {
        return Err(StructureError::Invalid(
            "bracket recipes do not reproduce the left-invariant complement".into(),
        ));
    }
    Ok(s)
}

fn heisenberg(d: usize) -> Result<CarnotModel, StructureError> {
    let mut degrees = vec![1; 2 * d];
    degrees.push(2);
    let top = [(2 * d, 1)];
    let rel: Vec<Relation<'_>> = (0..d).map(|i| (i, d + i, &top[..])).collect();
    let name = if d == 1 { "heisenberg1".to_string() } else { format!("heisenberg{d}") };
    CarnotModel::new(&name, LieAlgebra::from_relations(degrees, &rel)?, 2 * d, 2 * d)
}

fn engel() -> Result<CarnotModel, StructureError> {
    let alg = LieAlgebra::from_relations(vec![1, 1, 2, 3], &[(0, 1, &[(2, 1)]), (0, 2, &[(3, 1)])])?;
    CarnotModel::new("engel", alg, 2, 2)
}

/// Free nilpotent algebra with three generators and step three. The bracket
/// `[e3,e4] = e11 − e9` is forced by the Jacobi identity.
pub fn free33_algebra() -> LieAlgebra {
    let mut degrees = vec![1, 1, 1, 2, 2, 2];
    degrees.extend([3; 8]);
    LieAlgebra::from_relations(
        degrees,
        &[
            (0, 1, &[(3, 1)]),
            (0, 2, &[(4, 1)]),
            (1, 2, &[(5, 1)]),
            (0, 3, &[(6, 1)]),
            (0, 4, &[(7, 1)]),
            (0, 5, &[(8, 1)]),
            (1, 3, &[(9, 1)]),
            (1, 4, &[(10, 1)]),
            (1, 5, &[(11, 1)]),
            (2, 3, &[(8, -1), (10, 1)]),
            (2, 4, &[(12, 1)]),
            (2, 5, &[(13, 1)]),
        ],
    )
    .expect("static relations are well formed")
}

/// Flat model: `V = span(e_1..e_k)`, `W = span(e_{k+1}..e_n)`, constant projections.
pub fn flat_structure(n: usize, k: usize) -> Result<ComplementedStructure, StructureError> {
    if k == 0 || k >= n {
        return Err(StructureError::Invalid(format!("flat model needs 0 < k < n, got n={n}, k={k}")));
    }
    let frame = (0..k).map(|i| PolyVectorField::coordinate(n, i)).collect();
    let complement = (k..n).map(|i| PolyVectorField::coordinate(n, i)).collect();
    ComplementedStructure::with_complement(
        Distribution::new(format!("flat{n}_{k}"), frame)?,
        complement,
        vec![2; n - k],
        CATALOG_BOX,
    )
}

/// `flat` (n=3, k=2) or `flat{n}_{k}`.
pub fn parse_flat_name(name: &str) -> Option<(usize, usize)> {
    if name == "flat" {
        return Some((3, 2));
    }
    let (n, k) = name.strip_prefix("flat")?.split_once('_')?;
    Some((n.parse().ok()?, k.parse().ok()?))
}

pub fn build_catalog_model(name: &str) -> Result<CarnotModel, StructureError> {
    match name {
        "heisenberg1" => heisenberg(1),
        "heisenberg_d" => heisenberg(HEISENBERG_D_DEFAULT),
        "engel" => engel(),
        "free33" => CarnotModel::new("free33", free33_algebra(), 3, 3),
        "free33_v6" => CarnotModel::new("free33_v6", free33_algebra(), 3, 6),
        other => match other.strip_prefix("heisenberg").and_then(|d| d.parse::<usize>().ok()) {
            Some(d) if (1..=8).contains(&d) => heisenberg(d),
            _ => Err(StructureError::UnknownModel(other.to_string())),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_fields() {
        let m = build_catalog_model("heisenberg1").unwrap();
        let x = Polynomial::var(3, 0);
        let y = Polynomial::var(3, 1);
        let x1 = PolyVectorField::new(vec![Polynomial::one(3), Polynomial::zero(3), y.scale(&rat(-1, 2))]).unwrap();
        let x2 = PolyVectorField::new(vec![Polynomial::zero(3), Polynomial::one(3), x.scale(&rat(1, 2))]).unwrap();
        assert_eq!(m.fields()[0], x1);
        assert_eq!(m.fields()[1], x2);
        assert_eq!(x1.bracket(&x2).unwrap(), PolyVectorField::coordinate(3, 2));
        assert_eq!(m.structure().degrees(), &[1, 1, 2]);
    }

    #[test]
    fn every_catalog_model_satisfies_its_constants() {
        for name in CATALOG_NAMES {
            let m = build_catalog_model(name).unwrap();
            assert!(m.algebra().respects_grading(), "{name}");
            assert!(m.all_pairs_hold().unwrap(), "{name}");
        }
    }

    #[test]
    fn free33_relations() {
        let m = build_catalog_model("free33").unwrap();
        let checks = m.relation_checks().unwrap();
        assert_eq!(checks.len(), 12);
        assert!(checks.iter().all(|c| c.status == CheckStatus::ExactPass));
        // [X2,X5] = X11
        assert_eq!(m.check_relation(1, 4, &[(10, rat(1, 1))]).unwrap().status, CheckStatus::ExactPass);
        assert_eq!(m.structure().degrees()[3..6], [2, 2, 2]);
        assert_eq!(m.structure().degrees()[13], 3);
    }

    #[test]
    fn jacobi_rejects_inconsistent_constants() {
        let mut degrees = vec![1, 1, 1, 2, 2, 2];
        degrees.extend([3; 8]);
        let alg = LieAlgebra::from_relations(
            degrees,
            &[
                (0, 1, &[(3, 1)]),
                (0, 2, &[(4, 1)]),
                (1, 2, &[(5, 1)]),
                (0, 5, &[(8, 1)]),
                (1, 4, &[(10, 1)]),
                (2, 3, &[(7, -1), (10, 1)]),
            ],
        )
        .unwrap();
        assert!(alg.jacobi_violations().contains(&(0, 1, 2)));
    }

    #[test]
    fn engel_recipes_and_warning() {
        let m = build_catalog_model("engel").unwrap();
        let s = m.structure();
        assert_eq!(s.degrees(), &[1, 1, 2, 3]);
        assert_eq!(s.recipes().unwrap()[1].to_string(), "[1,[1,2]]");
        assert_eq!(s.warnings().len(), 1);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(build_catalog_model("sl2"), Err(StructureError::UnknownModel(_))));
        assert_eq!(build_catalog_model("heisenberg_d").unwrap().n(), 5);
        assert_eq!(parse_flat_name("flat"), Some((3, 2)));
        assert_eq!(parse_flat_name("flat5_2"), Some((5, 2)));
        let f = flat_structure(4, 2).unwrap();
        assert_eq!(f.degrees(), &[1, 1, 2, 2]);
    }
}
