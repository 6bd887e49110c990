use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::integrator::integrate;
use super::FlowError;
use crate::stats::{linear_fit, LinearFit};
use crate::structures::ComplementedStructure;

/// `Exp_ζ(t) = Φ_{Σ t_j X_j}(ζ, 1)` over the full frame.
#[derive(Clone, Debug)]
pub struct ExpChart<'a> {
    structure: &'a ComplementedStructure,
    base: Vec<f64>,
    h_int: f64,
    radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InversionResult {
    pub t: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

const NEWTON_TOL: f64 = 1e-11;
const NEWTON_MAX_ITERS: usize = 60;
const JACOBIAN_REFRESH: usize = 3;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl<'a> ExpChart<'a> {
    pub fn new(structure: &'a ComplementedStructure, base: &[f64], h_int: f64, radius: f64) -> Result<Self, FlowError> {
        if base.len() != structure.n() {
            return Err(FlowError::Dimension { expected: structure.n(), found: base.len() });
        }
        if !(radius > 0.0) || !(h_int > 0.0) || h_int > radius / 100.0 {
            return Err(FlowError::InvalidChart(format!(
                "need 0 < h_int ≤ r/100, found h_int = {h_int}, r = {radius}"
            )));
        }
        if !structure.in_box(base) {
            return Err(FlowError::InvalidChart("base point outside the working box".into()));
        }
        let f = structure.frame_matrix(base);
        if f.clone().try_inverse().is_none() {
            return Err(FlowError::Structure(crate::structures::StructureError::SingularFrame(base.to_vec())));
        }
        Ok(ExpChart {
            structure,
            base: base.to_vec(),
            h_int,
            radius,
        })
    }

    pub fn structure(&self) -> &ComplementedStructure {
        self.structure
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn h_int(&self) -> f64 {
        self.h_int
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn steps(&self, t: &[f64]) -> usize {
        // unit time; finer steps for long vectors so the step in space stays ≈ h_int
        ((norm(t).max(1.0) / self.h_int).ceil() as usize).max(1)
    }

    pub fn exp(&self, t: &[f64]) -> Result<Vec<f64>, FlowError> {
        let n = self.structure.n();
        if t.len() != n {
            return Err(FlowError::Dimension { expected: n, found: t.len() });
        }
        let r = norm(t);
        if r > self.radius {
            return Err(FlowError::RadiusExceeded { norm: r, radius: self.radius });
        }
        integrate(self.structure.compiled(), t, &self.base, 1.0, self.steps(t), self.structure.working_box())
    }

    fn jacobian(&self, t: &[f64], at: &[f64]) -> Result<DMatrix<f64>, FlowError> {
        let n = t.len();
        let mut j = DMatrix::zeros(n, n);
        for c in 0..n {
            let h = 1e-7 * t[c].abs().max(1e-2);
            let mut tp = t.to_vec();
            tp[c] += h;
            let y = integrate(self.structure.compiled(), &tp, &self.base, 1.0, self.steps(t), self.structure.working_box())?;
            for r in 0..n {
                j[(r, c)] = (y[r] - at[r]) / h;
            }
        }
        Ok(j)
    }

    /// Damped Newton for `Exp_ζ(t) = y` with a finite-difference Jacobian
    /// refreshed every third iteration.
    pub fn invert(&self, y: &[f64]) -> Result<InversionResult, FlowError> {
        let n = self.structure.n();
        if y.len() != n {
            return Err(FlowError::Dimension { expected: n, found: y.len() });
        }
        let f0 = self.structure.frame_matrix(&self.base);
        let d = DVector::from_iterator(n, y.iter().zip(&self.base).map(|(a, b)| a - b));
        let lu0 = f0.lu();
        let mut t: Vec<f64> = lu0.solve(&d).map(|v| v.iter().copied().collect()).unwrap_or_else(|| vec![0.0; n]);
        let clamp = |t: &mut Vec<f64>, radius: f64| {
            let r = norm(t);
            if r > radius {
                t.iter_mut().for_each(|v| *v *= radius / r);
            }
        };
        clamp(&mut t, self.radius);
        let residual_at = |t: &[f64]| -> Result<(Vec<f64>, f64), FlowError> {
            let x = self.exp(t)?;
            let r: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            let nr = norm(&r);
            Ok((r, nr))
        };
        let (mut r, mut rn) = residual_at(&t)?;
        let mut jac: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> = None;
        for it in 0..NEWTON_MAX_ITERS {
            if rn < NEWTON_TOL {
                return Ok(InversionResult { t, residual: rn, iterations: it });
            }
            if it % JACOBIAN_REFRESH == 0 || jac.is_none() {
                let x: Vec<f64> = r.iter().zip(y).map(|(a, b)| a + b).collect();
                jac = Some(self.jacobian(&t, &x)?.lu());
            }
            let step = jac
                .as_ref()
                .unwrap()
                .solve(&DVector::from_column_slice(&r))
                .ok_or(FlowError::NotConverged { residual: rn, iterations: it })?;
            let mut lambda = 1.0;
            let mut improved = false;
            for _ in 0..30 {
                let mut cand: Vec<f64> = t.iter().zip(step.iter()).map(|(a, s)| a - lambda * s).collect();
                clamp(&mut cand, self.radius);
                if let Ok((rc, rcn)) = residual_at(&cand) {
                    if rcn < rn {
                        t = cand;
                        r = rc;
                        rn = rcn;
                        improved = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !improved {
                if it % JACOBIAN_REFRESH != 0 {
                    jac = None;
                    continue;
                }
                return Err(FlowError::NotConverged { residual: rn, iterations: it });
            }
        }
        if rn < NEWTON_TOL {
            Ok(InversionResult { t, residual: rn, iterations: NEWTON_MAX_ITERS })
        } else {
            Err(FlowError::NotConverged { residual: rn, iterations: NEWTON_MAX_ITERS })
        }
    }
}

/// Largest Euclidean radius `δ` (on a halving ladder from `ρ`) such that
/// every sampled target in `U(ζ, δ)` is inverted with `|t| ≤ ρ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpennessReport {
    pub rho: f64,
    pub delta: f64,
    pub targets_per_level: usize,
    pub levels_tried: usize,
}

pub fn fit_openness(chart: &ExpChart<'_>, rho: f64, samples: usize, seed: u64) -> OpennessReport {
    let n = chart.structure.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<Vec<f64>> = (0..samples)
        .map(|_| {
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r = norm(&v).max(1e-12);
            v.into_iter().map(|x| x / r).collect()
        })
        .collect();
    let mut delta = rho;
    let mut levels = 0;
    while delta > rho * 1e-6 {
        levels += 1;
        let ok = dirs.par_iter().all(|u| {
            let y: Vec<f64> = chart.base.iter().zip(u).map(|(b, v)| b + delta * v).collect();
            matches!(chart.invert(&y), Ok(r) if norm(&r.t) <= rho)
        });
        if ok {
            break;
        }
        delta *= 0.5;
    }
    OpennessReport {
        rho,
        delta,
        targets_per_level: samples,
        levels_tried: levels,
    }
}

/// `(lower, upper)` bracket of a distance between two points.
pub trait DistanceOracle: Sync {
    fn bracket(&self, x: &[f64], y: &[f64]) -> Result<(f64, f64), String>;
}

impl<F> DistanceOracle for F
where
    F: Fn(&[f64], &[f64]) -> Result<(f64, f64), String> + Sync,
{
    fn bracket(&self, x: &[f64], y: &[f64]) -> Result<(f64, f64), String> {
        self(x, y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleRow {
    pub tau: f64,
    pub dist_lower: f64,
    pub dist_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub direction: usize,
    pub degree: u32,
    pub expected_slope: f64,
    pub fit: Option<LinearFit>,
    pub rows: Vec<ScaleRow>,
    pub dropped: Vec<(f64, String)>,
}

impl ExponentFit {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Regresses `log d(ζ, Exp_ζ(τ e_j))` (upper estimates) on `log τ`.
pub fn ballbox_exponent_fit(
    chart: &ExpChart<'_>,
    direction: usize,
    oracle: &dyn DistanceOracle,
    scales: &[f64],
) -> Result<ExponentFit, FlowError> {
    let n = chart.structure.n();
    if direction >= n {
        return Err(FlowError::Dimension { expected: n, found: direction + 1 });
    }
    let outcomes: Vec<Result<ScaleRow, (f64, String)>> = scales
        .par_iter()
        .map(|&tau| {
            let mut t = vec![0.0; n];
            t[direction] = tau;
            let y = chart.exp(&t).map_err(|e| (tau, e.to_string()))?;
            let (lo, hi) = oracle.bracket(chart.base(), &y).map_err(|e| (tau, e))?;
            Ok(ScaleRow { tau, dist_lower: lo, dist_upper: hi })
        })
        .collect();
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => rows.push(r),
            Err(d) => dropped.push(d),
        }
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.tau.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.dist_upper.ln()).collect();
    let degree = chart.structure.degrees()[direction];
    Ok(ExponentFit {
        direction,
        degree,
        expected_slope: 1.0 / degree as f64,
        fit: linear_fit(&xs, &ys),
        rows,
        dropped,
    })
}

/// Geometric grid of `count` scales from `lo` to `hi`.
pub fn geometric_scales(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::build_catalog_model;

    #[test]
    fn heisenberg_exp_is_identity_at_origin() {
        let h = build_catalog_model("heisenberg1").unwrap();
        let c = ExpChart::new(h.structure(), &[0.0; 3], 1e-3, 1.0).unwrap();
        assert_eq!(c.exp(&[0.0; 3]).unwrap(), vec![0.0; 3]);
        let y = c.exp(&[0.2, -0.1, 0.05]).unwrap();
        for (a, b) in y.iter().zip([0.2, -0.1, 0.05]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(matches!(c.exp(&[2.0, 0.0, 0.0]), Err(FlowError::RadiusExceeded { .. })));
        assert!(ExpChart::new(h.structure(), &[0.0; 3], 0.1, 1.0).is_err());
    }

    #[test]
    fn second_order_expansion() {
        let e = build_catalog_model("engel").unwrap();
        let s = e.structure();
        let zeta = [0.3, -0.2, 0.1, 0.4];
        let c = ExpChart::new(s, &zeta, 1e-4, 0.5).unwrap();
        let f = s.frame_matrix(&zeta);
        let dir = DVector::from_vec(vec![0.6, -0.3, 0.5, 0.2]);
        let (mut xs, mut ys) = (vec![], vec![]);
        for i in 0..8 {
            let r = 0.2 * 0.5f64.powi(i);
            let t = &dir * r;
            let y = c.exp(t.as_slice()).unwrap();
            let lin = &f * &t;
            let err: f64 = (0..4).map(|j| (y[j] - zeta[j] - lin[j]).powi(2)).sum::<f64>().sqrt();
            xs.push(t.norm().ln());
            ys.push(err.ln());
        }
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 0.1, "{fit:?}");
    }

    #[test]
    fn newton_inverts_exp() {
        let e = build_catalog_model("engel").unwrap();
        let c = ExpChart::new(e.structure(), &[0.1, 0.2, -0.1, 0.0], 1e-3, 1.0).unwrap();
        let t = [0.2, -0.3, 0.1, 0.05];
        let y = c.exp(&t).unwrap();
        let inv = c.invert(&y).unwrap();
        for (a, b) in inv.t.iter().zip(t) {
            assert!((a - b).abs() < 1e-9, "{inv:?}");
        }
        let o = fit_openness(&c, 0.5, 8, 1);
        assert!(o.delta > 0.0);
    }
}
