use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::curves::{ControlPath, Trajectory};
use super::{check_point, euclid, CurveWitness, DistanceEstimate, EstimateStatus, MetricsError};
use crate::calc::Point;
use crate::structures::{hormander_step, ComplementedStructure, HormanderResult};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CcOptions {
    /// Number of piecewise-constant control segments.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Endpoint tolerance for an accepted path.
    pub tolerance: f64,
    /// Minimum number of RK4 steps over the whole path.
    pub min_steps: usize,
}

impl Default for CcOptions {
    fn default() -> Self {
        CcOptions {
            budget: 24,
            restarts: 8,
            seed: 0,
            max_iters: 60,
            tolerance: 1e-6,
            min_steps: 96,
        }
    }
}

struct Shooter<'a> {
    s: &'a ComplementedStructure,
    x: &'a [f64],
    y: &'a [f64],
    m: usize,
    k: usize,
    substeps: usize,
}

struct Attempt {
    controls: Vec<f64>,
    length: f64,
    gap: f64,
}

impl Shooter<'_> {
    fn path(&self, u: &[f64]) -> ControlPath {
        let tau = 1.0 / self.m as f64;
        ControlPath {
            start: self.x.to_vec(),
            segments: u.chunks(self.k).map(|c| (c.to_vec(), tau)).collect(),
        }
    }

    fn run(&self, u: &[f64]) -> Option<Trajectory> {
        self.path(u).integrate(self.s, self.substeps).ok()
    }

    fn gap(&self, tr: &Trajectory) -> DVector<f64> {
        DVector::from_iterator(self.y.len(), self.y.iter().zip(&tr.end).map(|(a, b)| a - b))
    }

    fn jacobian(&self, u: &[f64], base: &Trajectory) -> Option<DMatrix<f64>> {
        let n = self.s.n();
        let scale = u.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let h = 1e-7 * scale;
        let cols: Vec<Option<Vec<f64>>> = (0..u.len())
            .map(|p| {
                let mut v = u.to_vec();
                v[p] += h;
                let tr = self.run(&v)?;
                Some(tr.end.iter().zip(&base.end).map(|(a, b)| (a - b) / h).collect())
            })
            .collect();
        let mut j = DMatrix::zeros(n, u.len());
        for (p, c) in cols.into_iter().enumerate() {
            let c = c?;
            for i in 0..n {
                j[(i, p)] = c[i];
            }
        }
        Some(j)
    }

    /// Block-diagonal weight `τ X(x_i)ᵀ X(x_i)` of the ambient energy.
    fn energy_weight(&self, tr: &Trajectory) -> DMatrix<f64> {
        let k = self.k;
        let tau = 1.0 / self.m as f64;
        let mut h = DMatrix::zeros(self.m * k, self.m * k);
        for (i, knot) in tr.knots.iter().take(self.m).enumerate() {
            let f = self.s.frame_matrix(knot).columns(0, k).into_owned();
            let g = f.transpose() * f * tau;
            for a in 0..k {
                for b in 0..k {
                    h[(i * k + a, i * k + b)] = g[(a, b)];
                }
            }
        }
        for i in 0..self.m * k {
            h[(i, i)] += 1e-12;
        }
        h
    }

    /// Minimum-energy steps under the linearised endpoint constraint, then
    /// minimum-norm Newton corrections of the endpoint.
    fn optimise(&self, u0: Vec<f64>, max_iters: usize, tol: f64) -> Option<Attempt> {
        let mut u = u0;
        let mut tr = self.run(&u)?;
        for _ in 0..max_iters {
            let c = self.gap(&tr);
            let j = self.jacobian(&u, &tr)?;
            let h = self.energy_weight(&tr);
            let hinv = h.clone().try_inverse()?;
            let uv = DVector::from_column_slice(&u);
            let s = &j * &hinv * j.transpose();
            let lam = s.lu().solve(&(&c + &j * &uv))?;
            let delta = -&uv + &hinv * j.transpose() * lam;
            let mut alpha = 1.0;
            let gap0 = c.norm();
            let mut accepted = false;
            for _ in 0..12 {
                let cand: Vec<f64> = u.iter().zip(delta.iter()).map(|(a, d)| a + alpha * d).collect();
                if let Some(t) = self.run(&cand) {
                    let g = self.gap(&t).norm();
                    if g <= (1.5 * gap0).max(1e-7) {
                        u = cand;
                        tr = t;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
            if alpha == 1.0 && delta.norm() <= 1e-9 * (1.0 + uv.norm()) && self.gap(&tr).norm() < 1e-10 {
                break;
            }
        }
        for _ in 0..20 {
            let c = self.gap(&tr);
            if c.norm() <= 0.1 * tol {
                break;
            }
            let j = self.jacobian(&u, &tr)?;
            let step = j.transpose() * (&j * j.transpose()).lu().solve(&c)?;
            let cand: Vec<f64> = u.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
            tr = self.run(&cand)?;
            u = cand;
        }
        let gap = self.gap(&tr).norm();
        Some(Attempt { controls: u, length: tr.length, gap })
    }
}

/// Sum of `|c_j|^{1/deg_j}` over the full-frame coordinates of `y − x` at `x`.
fn homogeneous_size(s: &ComplementedStructure, x: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>), MetricsError> {
    let f = s.frame_matrix(x);
    let d = DVector::from_iterator(x.len(), y.iter().zip(x).map(|(a, b)| a - b));
    let c = f.lu().solve(&d).ok_or_else(|| MetricsError::SingularProjection(x.to_vec()))?;
    let size = c
        .iter()
        .zip(s.degrees())
        .map(|(v, &deg)| v.abs().powf(1.0 / deg as f64))
        .sum();
    Ok((size, c.iter().take(s.k()).copied().collect()))
}

fn ensure_generating(s: &ComplementedStructure, x: &[f64]) -> Result<(), MetricsError> {
    if s.recipes().is_some() {
        // bracket-generated complement spanning R^n throughout the box
        return Ok(());
    }
    match hormander_step(s.distribution(), &Point::Float(x.to_vec()), 8)? {
        HormanderResult::Step { .. } => Ok(()),
        HormanderResult::NotGenerating { .. } => Err(MetricsError::NotBracketGenerating(x.to_vec())),
    }
}

/// Bracket for the Carnot-Carathéodory distance.
///
/// The upper value is the ambient Euclidean length of the best
/// piecewise-constant control path whose endpoint lands within the
/// tolerance; the lower value is `|x−y|`. Restart 0 uses constant controls
/// and ends the search early when it already matches the lower value.
pub fn cc_distance(s: &ComplementedStructure, x: &[f64], y: &[f64], opts: &CcOptions) -> Result<DistanceEstimate, MetricsError> {
    check_point(s, x)?;
    check_point(s, y)?;
    if opts.budget == 0 {
        return Err(MetricsError::Invalid("budget must be at least one segment".into()));
    }
    if x == y {
        return Ok(DistanceEstimate::zero("cc-shooting", x));
    }
    ensure_generating(s, x)?;
    let k = s.k();
    let m = opts.budget;
    let shooter = Shooter {
        s,
        x,
        y,
        m,
        k,
        substeps: opts.min_steps.div_ceil(m).max(2),
    };
    let lower = euclid(x, y);
    let (size, horizontal) = homogeneous_size(s, x, y)?;
    let initial = |r: usize| -> Vec<f64> {
        let mut u: Vec<f64> = (0..m).flat_map(|_| horizontal.iter().copied()).collect();
        if r == 0 {
            return u;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(r as u64);
        let modes: Vec<(f64, Vec<f64>, Vec<f64>)> = (1..=2)
            .map(|f| {
                let sigma = 3.0 * size / f as f64;
                let a = (0..k).map(|_| sigma * rng.random_range(-1.0..1.0)).collect();
                let b = (0..k).map(|_| sigma * rng.random_range(-1.0..1.0)).collect();
                (f as f64, a, b)
            })
            .collect();
        for i in 0..m {
            let t = (i as f64 + 0.5) / m as f64;
            for (f, a, b) in &modes {
                let (c, sn) = (2.0 * std::f64::consts::PI * f * t).sin_cos();
                for j in 0..k {
                    u[i * k + j] += a[j] * sn + b[j] * c;
                }
            }
        }
        u
    };
    let accept = |a: &Attempt| a.gap <= opts.tolerance && a.length.is_finite();
    let first = shooter.optimise(initial(0), opts.max_iters, opts.tolerance);
    let mut attempts: Vec<Option<Attempt>> = vec![first];
    let straight_done = matches!(&attempts[0], Some(a) if accept(a) && a.length <= lower * (1.0 + 1e-9));
    if !straight_done {
        let rest: Vec<Option<Attempt>> = (1..opts.restarts.max(1))
            .into_par_iter()
            .map(|r| shooter.optimise(initial(r), opts.max_iters, opts.tolerance))
            .collect();
        attempts.extend(rest);
    }
    let best = attempts
        .iter()
        .enumerate()
        .filter_map(|(i, a)| a.as_ref().filter(|a| accept(a)).map(|a| (i, a)))
        .min_by(|(i, a), (j, b)| a.length.total_cmp(&b.length).then(i.cmp(j)));
    let (status, chosen) = match best {
        Some((_, a)) => (EstimateStatus::Converged, Some(a)),
        None => (
            EstimateStatus::UpperOnlyUnconverged,
            attempts
                .iter()
                .flatten()
                .min_by(|a, b| a.gap.total_cmp(&b.gap)),
        ),
    };
    let (upper, gap, witness) = match chosen {
        Some(a) => (a.length, a.gap, CurveWitness::Control(shooter.path(&a.controls))),
        None => (f64::INFINITY, f64::INFINITY, CurveWitness::None),
    };
    Ok(DistanceEstimate {
        lower: if status == EstimateStatus::Converged { lower.min(upper) } else { lower },
        upper,
        witness,
        endpoint_gap: gap,
        status,
        method: "cc-shooting".into(),
        lower_source: "euclidean".into(),
        budget: m,
        restarts: attempts.len(),
        seed: opts.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::oracle::heisenberg_lattice_distance;
    use crate::structures::{build_catalog_model, flat_structure};

    #[test]
    fn horizontal_unit_step() {
        let h = build_catalog_model("heisenberg1").unwrap();
        let e = cc_distance(h.structure(), &[0.0; 3], &[1.0, 0.0, 0.0], &CcOptions::default()).unwrap();
        assert!(e.converged());
        assert!(e.lower >= 1.0 - 1e-12 && e.upper <= 1.001, "{e:?}");
        assert_eq!(e.restarts, 1);
    }

    #[test]
    fn vertical_matches_lattice_oracle() {
        let h = build_catalog_model("heisenberg1").unwrap();
        let s = 0.05;
        let e = cc_distance(h.structure(), &[0.0; 3], &[0.0, 0.0, s], &CcOptions::default()).unwrap();
        assert!(e.converged() && e.endpoint_gap <= 1e-6);
        let oracle = heisenberg_lattice_distance([0.0, 0.0, s], 256).unwrap();
        assert!((e.upper / oracle.length - 1.0).abs() < 0.1, "{} vs {}", e.upper, oracle.length);
        // circle of area s has perimeter sqrt(4πs)
        assert!((e.upper / (4.0 * std::f64::consts::PI * s).sqrt() - 1.0).abs() < 0.02);
    }

    #[test]
    fn flat_model_is_rejected() {
        let f = flat_structure(3, 2).unwrap();
        let r = cc_distance(&f, &[0.0; 3], &[0.0, 0.0, 0.1], &CcOptions::default());
        assert!(matches!(r, Err(MetricsError::NotBracketGenerating(_))));
    }

    #[test]
    fn same_point() {
        let h = build_catalog_model("heisenberg1").unwrap();
        let e = cc_distance(h.structure(), &[0.2; 3], &[0.2; 3], &CcOptions::default()).unwrap();
        assert_eq!((e.lower, e.upper), (0.0, 0.0));
    }
}
