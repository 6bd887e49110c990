use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::complemented::ComplementedStructure;
use super::StructureError;
use crate::calc::{RatMatrix, Rational};

/// Oblique projections onto `V(x)` along `W(x)` and onto `W(x)` along `V(x)`.
#[derive(Clone, Debug)]
pub struct ProjectionPair {
    pub base: Vec<f64>,
    pub pv: DMatrix<f64>,
    pub pw: DMatrix<f64>,
}

impl ProjectionPair {
    pub fn split(&self, v: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let v = DVector::from_column_slice(v);
        (&self.pv * &v, &self.pw * &v)
    }

    /// `(|Π^V v|, |Π^W v|)`.
    pub fn norms(&self, v: &[f64]) -> (f64, f64) {
        let (a, b) = self.split(v);
        (a.norm(), b.norm())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactProjectionPair {
    pub pv: RatMatrix,
    pub pw: RatMatrix,
}

fn block_projections(f: &DMatrix<f64>, finv: &DMatrix<f64>, k: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = f.nrows();
    let pv = f.columns(0, k) * finv.rows(0, k);
    let pw = f.columns(k, n - k) * finv.rows(k, n - k);
    (pv, pw)
}

pub fn complement_projections(s: &ComplementedStructure, x: &[f64]) -> Result<ProjectionPair, StructureError> {
    if x.len() != s.n() {
        return Err(StructureError::Invalid(format!("point of dimension {} in R^{}", x.len(), s.n())));
    }
    let f = s.frame_matrix(x);
    let finv = f
        .clone()
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or_else(|| StructureError::SingularFrame(x.to_vec()))?;
    let (pv, pw) = block_projections(&f, &finv, s.k());
    Ok(ProjectionPair {
        base: x.to_vec(),
        pv,
        pw,
    })
}

pub fn complement_projections_exact(
    s: &ComplementedStructure,
    x: &[Rational],
) -> Result<ExactProjectionPair, StructureError> {
    let f = s.frame_matrix_exact(x)?;
    let finv = f
        .inverse()
        .ok_or_else(|| StructureError::SingularFrame(x.iter().map(crate::calc::rational_to_f64).collect()))?;
    let n = s.n();
    let k = s.k();
    let mut dv = RatMatrix::zeros(n, n);
    for i in 0..k {
        dv[(i, i)] = Rational::from_integer(1.into());
    }
    let pv = f.mul(&dv).mul(&finv);
    let mut pw = RatMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            pw[(i, j)] -= pv[(i, j)].clone();
        }
    }
    Ok(ExactProjectionPair { pv, pw })
}

/// Closed Euclidean ball.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusEstimate {
    /// Fitted Lipschitz constant of `x ↦ Π^V_x` with the safety factor applied.
    pub c: f64,
    pub max_quotient: f64,
    pub safety_factor: f64,
    pub shells: usize,
    pub points: usize,
    pub seed: u64,
}

pub const MODULUS_SAFETY: f64 = 1.1;
/// Finest shell radius `2^{-MAX_LADDER/2}`.
const MAX_LADDER: i32 = 24;
const PARTNER_STEP: f64 = 1e-4;
const SHELL_FACTOR: f64 = 0.999;

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

fn unit_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-3 && r <= 1.0 {
            out.push(v.into_iter().map(|x| x / r).collect());
        }
    }
    out
}

/// Direction `u` maximising `‖DΠ^V(p)[u]‖` by alternating maximisation over
/// `u` and the top singular pair.
fn steepest_direction(s: &ComplementedStructure, p: &[f64]) -> Result<Vec<f64>, StructureError> {
    let n = p.len();
    let h = 1e-6 * p.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut partials = Vec::with_capacity(n);
    for i in 0..n {
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[i] += h;
        b[i] -= h;
        let pa = complement_projections(s, &a)?.pv;
        let pb = complement_projections(s, &b)?.pv;
        partials.push((pa - pb) / (2.0 * h));
    }
    let combine = |u: &[f64]| {
        partials
            .iter()
            .zip(u)
            .fold(DMatrix::zeros(n, n), |acc, (a, &ui)| acc + a * ui)
    };
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    for start in 0..n {
        let mut u = vec![0.0; n];
        u[start] = 1.0;
        for _ in 0..25 {
            let svd = combine(&u).svd(true, true);
            let idx = svd.singular_values.imax();
            let left = svd.u.as_ref().unwrap().column(idx).into_owned();
            let right = svd.v_t.as_ref().unwrap().row(idx).transpose();
            let g: Vec<f64> = partials.iter().map(|a| left.dot(&(a * &right))).collect();
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-300 {
                break;
            }
            u = g.iter().map(|x| x / norm).collect();
        }
        let val = spectral_norm(&combine(&u));
        if val > best.0 {
            best = (val, u);
        }
    }
    Ok(best.1)
}

/// Sampled Lipschitz constant of `x ↦ Π^V_x` on a ball.
///
/// Sample points lie on shells of radius `ρ_j = 2^{-j/2} ≤ R` around the
/// centre along `samples` seeded directions, so the sample set of a smaller
/// ball is contained in that of a larger one and the estimate is monotone in
/// the radius. Each point is paired with a close partner along the direction
/// of steepest change of the projection.
pub fn projection_modulus(
    s: &ComplementedStructure,
    region: &Region,
    samples: usize,
    seed: u64,
) -> Result<ModulusEstimate, StructureError> {
    let n = s.n();
    if region.center.len() != n || !(region.radius > 0.0) {
        return Err(StructureError::Invalid("region must be a ball of positive radius in R^n".into()));
    }
    let [lo, hi] = s.working_box();
    if region.center.iter().any(|&c| c - region.radius < lo || c + region.radius > hi) {
        return Err(StructureError::Invalid("region leaves the working box".into()));
    }
    let j_min = (-2.0 * region.radius.log2()).ceil() as i32;
    let dirs = unit_directions(n, samples.max(1), seed);
    let mut points = vec![region.center.clone()];
    let mut radii = vec![2f64.powf(-MAX_LADDER as f64 / 2.0)];
    let mut shells = 0;
    for j in j_min..=MAX_LADDER {
        let rho = 2f64.powf(-j as f64 / 2.0);
        if rho > region.radius {
            continue;
        }
        shells += 1;
        for d in &dirs {
            points.push(region.center.iter().zip(d).map(|(c, u)| c + SHELL_FACTOR * rho * u).collect());
            radii.push(rho);
        }
    }
    let quotients = points
        .par_iter()
        .zip(radii.par_iter())
        .map(|(p, &rho)| {
            let u = steepest_direction(s, p)?;
            let h = PARTNER_STEP * rho;
            let q: Vec<f64> = p.iter().zip(&u).map(|(a, b)| a + h * b).collect();
            let dist = p.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let diff = complement_projections(s, p)?.pv - complement_projections(s, &q)?.pv;
            Ok(spectral_norm(&diff) / dist)
        })
        .collect::<Result<Vec<f64>, StructureError>>()?;
    let max_quotient = quotients.into_iter().fold(0.0, f64::max);
    // quotients at rounding level of a constant projection are reported as 0
    let max_quotient = if max_quotient < 1e-6 { 0.0 } else { max_quotient };
    Ok(ModulusEstimate {
        c: MODULUS_SAFETY * max_quotient,
        max_quotient,
        safety_factor: MODULUS_SAFETY,
        shells,
        points: points.len(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calc::{rat, PolyVectorField};
    use crate::structures::{build_catalog_model, Distribution};

    pub(crate) fn flat(n: usize, k: usize) -> ComplementedStructure {
        let frame = (0..k).map(|i| PolyVectorField::coordinate(n, i)).collect();
        let comp = (k..n).map(|i| PolyVectorField::coordinate(n, i)).collect();
        ComplementedStructure::with_complement(
            Distribution::new("flat", frame).unwrap(),
            comp,
            vec![2; n - k],
            [-2.0, 2.0],
        )
        .unwrap()
    }

    #[test]
    fn flat_projection_is_diagonal() {
        let s = flat(4, 2);
        let p = complement_projections(&s, &[0.3, 0.1, -0.7, 1.0]).unwrap();
        let mut d = DMatrix::zeros(4, 4);
        d[(0, 0)] = 1.0;
        d[(1, 1)] = 1.0;
        assert_eq!(p.pv, d);
    }

    #[test]
    fn heisenberg_projection_of_e1() {
        let h = build_catalog_model("heisenberg1").unwrap();
        let s = h.structure();
        let x = [rat(0, 1), rat(1, 1), rat(0, 1)];
        let e = complement_projections_exact(s, &x).unwrap();
        let v = e.pw.mul_vec(&[rat(1, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(v, vec![rat(0, 1), rat(0, 1), rat(1, 2)]);
        assert!(e.pv.mul(&e.pw).is_zero());
        assert_eq!(e.pv.mul(&e.pv), e.pv);
        let f = complement_projections(s, &[0.0, 1.0, 0.0]).unwrap();
        assert!((f.pw[(2, 0)] - 0.5).abs() < 1e-15);
        let sum = &f.pv + &f.pw - DMatrix::identity(3, 3);
        assert!(sum.amax() < 1e-12);
    }

    #[test]
    fn modulus_flat_and_heisenberg() {
        let s = flat(3, 2);
        let r = Region { center: vec![0.0; 3], radius: 1.0 };
        assert_eq!(projection_modulus(&s, &r, 16, 1).unwrap().c, 0.0);
        let h = build_catalog_model("heisenberg1").unwrap();
        let a = projection_modulus(h.structure(), &r, 32, 1).unwrap();
        let b = projection_modulus(h.structure(), &r, 32, 2).unwrap();
        // Π^V differs by |Δ_horizontal|/2 in operator norm
        assert!((a.max_quotient - 0.5).abs() < 1e-6, "{a:?}");
        assert!((a.c - b.c).abs() / a.c < 0.01);
    }

    #[test]
    fn modulus_monotone_in_radius() {
        let e = build_catalog_model("engel").unwrap();
        let mut last = 0.0;
        for r in [0.125, 0.25, 0.5, 1.0] {
            let m = projection_modulus(e.structure(), &Region { center: vec![0.0; 4], radius: r }, 16, 5).unwrap();
            assert!(m.c >= last, "{r}: {} < {last}", m.c);
            last = m.c;
        }
        assert!(last > 0.0);
    }
}
