use std::fmt;

use nalgebra::DMatrix;

use super::sampling::halton;
use super::StructureError;
use crate::calc::{CompiledFrame, PolyVectorField, RatMatrix, Rational};

/// Number of quasi-random points used for the independence check.
pub const INDEPENDENCE_SAMPLES: usize = 1000;
const DEPENDENCE_RTOL: f64 = 1e-10;

/// A rank-`k` distribution on `R^n` spanned by polynomial fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub name: String,
    n: usize,
    frame: Vec<PolyVectorField>,
}

impl Distribution {
    pub fn new(name: impl Into<String>, frame: Vec<PolyVectorField>) -> Result<Self, StructureError> {
        let n = frame
            .first()
            .map(PolyVectorField::num_vars)
            .ok_or_else(|| StructureError::Invalid("empty frame".into()))?;
        if let Some(f) = frame.iter().find(|f| f.num_vars() != n) {
            return Err(StructureError::Invalid(format!(
                "frame fields live in R^{} and R^{}",
                n,
                f.num_vars()
            )));
        }
        if frame.len() > n {
            return Err(StructureError::Invalid(format!("{} fields in R^{n}", frame.len())));
        }
        Ok(Distribution {
            name: name.into(),
            n,
            frame,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.frame.len()
    }

    pub fn frame(&self) -> &[PolyVectorField] {
        &self.frame
    }
}

/// An iterated bracket of frame fields, e.g. `[1,[1,2]]` (1-based when printed).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Recipe {
    Leaf(usize),
    Bracket(Box<Recipe>, Box<Recipe>),
}

impl Recipe {
    pub fn pair(i: usize, j: usize) -> Self {
        Recipe::Bracket(Box::new(Recipe::Leaf(i)), Box::new(Recipe::Leaf(j)))
    }

    pub fn bracket(a: Recipe, b: Recipe) -> Self {
        Recipe::Bracket(Box::new(a), Box::new(b))
    }

    /// Number of frame fields entering the commutator.
    pub fn degree(&self) -> u32 {
        match self {
            Recipe::Leaf(_) => 1,
            Recipe::Bracket(a, b) => a.degree() + b.degree(),
        }
    }

    pub fn max_leaf(&self) -> usize {
        match self {
            Recipe::Leaf(i) => *i,
            Recipe::Bracket(a, b) => a.max_leaf().max(b.max_leaf()),
        }
    }

    pub fn evaluate(&self, frame: &[PolyVectorField]) -> Result<PolyVectorField, StructureError> {
        match self {
            Recipe::Leaf(i) => frame.get(*i).cloned().ok_or_else(|| {
                StructureError::InvalidRecipe(format!("index {} exceeds frame size {}", i + 1, frame.len()))
            }),
            Recipe::Bracket(a, b) => Ok(a.evaluate(frame)?.bracket(&b.evaluate(frame)?)?),
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Recipe::Leaf(i) => write!(f, "{}", i + 1),
            Recipe::Bracket(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceReport {
    pub samples: usize,
    pub working_box: [f64; 2],
    pub min_singular_value: f64,
    pub worst_point: Vec<f64>,
}

/// A distribution together with complement fields spanning `R^n` with it.
#[derive(Clone, Debug)]
pub struct ComplementedStructure {
    distribution: Distribution,
    complement: Vec<PolyVectorField>,
    recipes: Option<Vec<Recipe>>,
    degrees: Vec<u32>,
    working_box: [f64; 2],
    independence: IndependenceReport,
    warnings: Vec<String>,
    full: Vec<PolyVectorField>,
    compiled: CompiledFrame,
}

impl ComplementedStructure {
    /// Complement fields are the brackets named by `recipes`.
    pub fn from_recipes(
        distribution: Distribution,
        recipes: Vec<Recipe>,
        working_box: [f64; 2],
    ) -> Result<Self, StructureError> {
        let mut complement = Vec::with_capacity(recipes.len());
        for r in &recipes {
            if matches!(r, Recipe::Leaf(_)) {
                return Err(StructureError::InvalidRecipe(format!(
                    "complement field {r} is not a commutator"
                )));
            }
            complement.push(r.evaluate(distribution.frame())?);
        }
        let degrees = recipes.iter().map(Recipe::degree).collect();
        Self::assemble(distribution, complement, Some(recipes), degrees, working_box)
    }

    /// Complement given explicitly with declared degrees.
    pub fn with_complement(
        distribution: Distribution,
        complement: Vec<PolyVectorField>,
        degrees: Vec<u32>,
        working_box: [f64; 2],
    ) -> Result<Self, StructureError> {
        Self::assemble(distribution, complement, None, degrees, working_box)
    }

    fn assemble(
        distribution: Distribution,
        complement: Vec<PolyVectorField>,
        recipes: Option<Vec<Recipe>>,
        complement_degrees: Vec<u32>,
        working_box: [f64; 2],
    ) -> Result<Self, StructureError> {
        let n = distribution.n();
        let k = distribution.k();
        if k + complement.len() != n {
            return Err(StructureError::Invalid(format!(
                "{k} frame fields and {} complement fields do not span R^{n}",
                complement.len()
            )));
        }
        if complement_degrees.len() != complement.len() {
            return Err(StructureError::Invalid("one degree per complement field".into()));
        }
        if complement_degrees.iter().any(|&d| d < 2) {
            return Err(StructureError::Invalid("complement degrees must be at least 2".into()));
        }
        if !(working_box[0] < working_box[1]) || !working_box.iter().all(|v| v.is_finite()) {
            return Err(StructureError::Invalid(format!("bad working box {working_box:?}")));
        }
        if let Some(c) = complement.iter().find(|c| c.num_vars() != n) {
            return Err(StructureError::Invalid(format!(
                "complement field in R^{} for a structure in R^{n}",
                c.num_vars()
            )));
        }
        let mut degrees = vec![1u32; k];
        degrees.extend_from_slice(&complement_degrees);
        let mut warnings = Vec::new();
        if let (Some(lo), Some(hi)) = (complement_degrees.iter().min(), complement_degrees.iter().max()) {
            if lo != hi {
                warnings.push(format!(
                    "complement mixes degrees {lo}..{hi}; eta-squeezing is only defined for a single complement degree"
                ));
            }
        }
        let full: Vec<PolyVectorField> = distribution
            .frame()
            .iter()
            .chain(complement.iter())
            .cloned()
            .collect();
        let compiled = CompiledFrame::new(&full);
        let independence = check_independence(&compiled, working_box)?;
        Ok(ComplementedStructure {
            distribution,
            complement,
            recipes,
            degrees,
            working_box,
            independence,
            warnings,
            full,
            compiled,
        })
    }

    pub fn name(&self) -> &str {
        &self.distribution.name
    }

    pub fn n(&self) -> usize {
        self.distribution.n()
    }

    pub fn k(&self) -> usize {
        self.distribution.k()
    }

    pub fn distribution(&self) -> &Distribution {
        &self.distribution
    }

    pub fn frame(&self) -> &[PolyVectorField] {
        self.distribution.frame()
    }

    pub fn complement(&self) -> &[PolyVectorField] {
        &self.complement
    }

    /// Frame followed by complement.
    pub fn full_frame(&self) -> &[PolyVectorField] {
        &self.full
    }

    pub fn recipes(&self) -> Option<&[Recipe]> {
        self.recipes.as_deref()
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn working_box(&self) -> [f64; 2] {
        self.working_box
    }

    pub fn independence(&self) -> &IndependenceReport {
        &self.independence
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn compiled(&self) -> &CompiledFrame {
        &self.compiled
    }

    pub fn in_box(&self, x: &[f64]) -> bool {
        let [lo, hi] = self.working_box;
        x.iter().all(|&v| v >= lo && v <= hi)
    }

    /// Columns `X_1(x), …, X_n(x)`.
    pub fn frame_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        self.compiled.matrix(x)
    }

    pub fn frame_matrix_exact(&self, x: &[Rational]) -> Result<RatMatrix, StructureError> {
        let cols = self
            .full
            .iter()
            .map(|f| f.eval_exact(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RatMatrix::from_columns(&cols))
    }

    /// Replaces the frame by `Y_b = Σ_a G[a][b] X_a` for a constant invertible
    /// `G`, keeping the complement fields.
    pub fn reparametrize_frame(&self, g: &RatMatrix) -> Result<Self, StructureError> {
        let k = self.k();
        if g.nrows() != k || g.ncols() != k || g.rank() != k {
            return Err(StructureError::Invalid("reparametrization must be an invertible k×k matrix".into()));
        }
        let frame = (0..k)
            .map(|b| {
                (0..k).fold(PolyVectorField::zero(self.n()), |acc, a| {
                    &acc + &self.frame()[a].scale(&g[(a, b)])
                })
            })
            .collect();
        let dist = Distribution::new(self.name().to_string(), frame)?;
        Self::with_complement(dist, self.complement.clone(), self.degrees[k..].to_vec(), self.working_box)
    }

    /// Multiplies each complement field by a nonzero constant.
    pub fn rescale_complement(&self, factors: &[Rational]) -> Result<Self, StructureError> {
        if factors.len() != self.complement.len() || factors.iter().any(|f| *f == Rational::from_integer(0.into())) {
            return Err(StructureError::Invalid("one nonzero factor per complement field".into()));
        }
        let complement = self
            .complement
            .iter()
            .zip(factors)
            .map(|(c, f)| c.scale(f))
            .collect();
        Self::with_complement(
            self.distribution.clone(),
            complement,
            self.degrees[self.k()..].to_vec(),
            self.working_box,
        )
    }
}

fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn check_independence(frame: &CompiledFrame, working_box: [f64; 2]) -> Result<IndependenceReport, StructureError> {
    let n = frame.dim();
    let [lo, hi] = working_box;
    let mut worst = (f64::INFINITY, vec![]);
    let centre = vec![0.5 * (lo + hi); n];
    let points = std::iter::once(centre).chain((1..=INDEPENDENCE_SAMPLES as u64).map(|i| {
        halton(i, n).into_iter().map(|h| lo + (hi - lo) * h).collect::<Vec<_>>()
    }));
    for x in points {
        let sv = singular_values(&frame.matrix(&x));
        let smax = sv[0].max(1.0);
        let smin = *sv.last().unwrap();
        if !(smin > DEPENDENCE_RTOL * smax) {
            return Err(StructureError::DependentFrame {
                point: x,
                singular_values: sv,
            });
        }
        if smin < worst.0 {
            worst = (smin, x);
        }
    }
    Ok(IndependenceReport {
        samples: INDEPENDENCE_SAMPLES,
        working_box,
        min_singular_value: worst.0,
        worst_point: worst.1,
    })
}
