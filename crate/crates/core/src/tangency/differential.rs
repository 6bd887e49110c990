//! Metric differentials and the metric Jacobian of a seminorm.

use serde::Serialize;

use super::TangencyError;
use crate::metrics::MetricEstimator;
use crate::stats::linear_fit;
use crate::structures::halton;

/// Values `MD[u]` at or below this count as a degenerate direction.
pub const DEGENERATE_SEMINORM: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DifferentialOptions {
    /// Radii, any order; those with `x + ru ∉ K` are skipped.
    pub radii: Vec<f64>,
    /// Monotone growth past this value flags divergence.
    pub cap: f64,
}

impl Default for DifferentialOptions {
    fn default() -> Self {
        Self { radii: (0..8).map(|j| 0.1 * 0.5f64.powi(j)).collect(), cap: 10.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricDifferential {
    /// Intercept at `r = 0` of a linear fit of the quotients in `r`.
    pub value: f64,
    /// `max − min` of the quotients.
    pub spread: f64,
    /// `(r, d(f(x), f(x+ru))/r)`, decreasing `r`.
    pub quotients: Vec<(f64, f64)>,
    pub divergent: bool,
    pub dropped: usize,
}

/// `MD(f,x)[u]` from difference quotients `d(f(x+ru), f(x))/r` (upper distance estimates).
/// `f` returns `None` outside its domain.
pub fn metric_differential(
    f: &(dyn Fn(&[f64]) -> Option<Vec<f64>> + Sync),
    metric: &dyn MetricEstimator,
    x: &[f64],
    u: &[f64],
    opts: &DifferentialOptions,
) -> Result<MetricDifferential, TangencyError> {
    if x.len() != u.len() {
        return Err(TangencyError::Dimension { expected: x.len(), found: u.len() });
    }
    let fx = f(x).ok_or_else(|| TangencyError::Invalid("base point outside the domain".into()))?;
    let mut radii: Vec<f64> = opts.radii.iter().copied().filter(|r| *r > 0.0).collect();
    radii.sort_by(|a, b| b.total_cmp(a));
    let mut quotients = Vec::new();
    let mut dropped = 0;
    for r in radii {
        let xr: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + r * b).collect();
        let Some(fr) = f(&xr) else { continue };
        match metric.estimate(&fx, &fr) {
            Ok(e) if e.converged() => quotients.push((r, e.upper / r)),
            _ => dropped += 1,
        }
    }
    if quotients.len() < 2 {
        return Err(TangencyError::TooFewRadii(quotients.len()));
    }
    let qs: Vec<f64> = quotients.iter().map(|q| q.1).collect();
    let max = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = qs.iter().copied().fold(f64::INFINITY, f64::min);
    let growing = qs.windows(2).all(|w| w[1] > w[0]);
    let divergent = growing && *qs.last().unwrap() > opts.cap;
    let rs: Vec<f64> = quotients.iter().map(|q| q.0).collect();
    let value = if divergent {
        f64::INFINITY
    } else {
        linear_fit(&rs, &qs).map_or(qs[qs.len() - 1], |f| f.intercept.max(0.0))
    };
    Ok(MetricDifferential { value, spread: max - min, quotients, divergent, dropped })
}

/// Samples of a seminorm on a quasi-uniform grid of the unit sphere `S^{m−1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeminormSample {
    pub directions: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

/// `m = 1`: `±1`; `m = 2`: equally spaced angles; `m = 3`: a Fibonacci
/// lattice; higher `m`: normalized Gaussian images of Halton points.
pub fn sphere_grid(m: usize, count: usize) -> Vec<Vec<f64>> {
    match m {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * i as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => (1..=count as u64)
            .map(|i| {
                let h = halton(i, 2 * m);
                let g: Vec<f64> = (0..m)
                    .map(|j| {
                        let (u1, u2) = (h[2 * j].max(1e-300), h[2 * j + 1]);
                        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                    })
                    .collect();
                let n = g.iter().map(|a| a * a).sum::<f64>().sqrt();
                g.into_iter().map(|a| a / n).collect()
            })
            .collect(),
    }
}

impl SeminormSample {
    pub fn new(directions: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self, TangencyError> {
        if directions.is_empty() {
            return Err(TangencyError::Invalid("empty direction grid".into()));
        }
        if directions.len() != values.len() {
            return Err(TangencyError::Invalid("one value per direction".into()));
        }
        let m = directions[0].len();
        for d in &directions {
            let n = d.iter().map(|a| a * a).sum::<f64>().sqrt();
            if d.len() != m || (n - 1.0).abs() > 1e-9 {
                return Err(TangencyError::Invalid(format!("direction {d:?} is not a unit vector in R^{m}")));
            }
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(TangencyError::Invalid(format!("seminorm value {v} is not finite and non-negative")));
        }
        for (i, d) in directions.iter().enumerate() {
            for (j, e) in directions.iter().enumerate().skip(i + 1) {
                let antipodal = d.iter().zip(e).all(|(a, b)| (a + b).abs() < 1e-9);
                let scale = values[i].max(values[j]).max(1.0);
                if antipodal && (values[i] - values[j]).abs() > 1e-9 * scale {
                    return Err(TangencyError::Invalid(format!("values differ at ±{d:?}")));
                }
            }
        }
        Ok(Self { directions, values })
    }

    /// Samples `seminorm` on [`sphere_grid`].
    pub fn from_fn(m: usize, count: usize, seminorm: impl Fn(&[f64]) -> f64) -> Result<Self, TangencyError> {
        let directions = sphere_grid(m, count);
        let values = directions.iter().map(|d| seminorm(d)).collect();
        Self::new(directions, values)
    }

    pub fn dim(&self) -> usize {
        self.directions[0].len()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { directions: self.directions.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }
}

/// `𝔍 = m ω_m (∫_{S^{m−1}} MD[u]^{−m} dℋ^{m−1})^{−1}`. With equal quadrature
/// weights `|S^{m−1}|/N` and `|S^{m−1}| = m ω_m` this is `1/mean(MD^{−m})`.
/// Exactly 0 when a sampled value is degenerate.
pub fn metric_jacobian(sample: &SeminormSample, m: usize) -> Result<f64, TangencyError> {
    if m < 1 {
        return Err(TangencyError::Invalid("m must be at least 1".into()));
    }
    if sample.directions.is_empty() {
        return Err(TangencyError::Invalid("empty direction grid".into()));
    }
    if sample.dim() != m {
        return Err(TangencyError::Dimension { expected: m, found: sample.dim() });
    }
    if sample.values.iter().any(|&v| v <= DEGENERATE_SEMINORM) {
        return Ok(0.0);
    }
    let mean = sample.values.iter().map(|v| v.powi(-(m as i32))).sum::<f64>() / sample.values.len() as f64;
    Ok(1.0 / mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{CcEstimator, CcOptions, EtaContext, EtaEstimator, EtaOptions};
    use crate::structures::{flat_structure, resolve_structure, Region};

    fn euclid_norm(u: &[f64]) -> f64 {
        u.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    #[test]
    fn jacobian_oracles() {
        for (m, n) in [(1, 2), (2, 64), (3, 400), (4, 2000)] {
            let s = SeminormSample::from_fn(m, n, euclid_norm).unwrap();
            assert!((metric_jacobian(&s, m).unwrap() - 1.0).abs() < 1e-12);
            let j = metric_jacobian(&s.scaled(1.7), m).unwrap();
            assert!((j - 1.7f64.powi(m as i32)).abs() < 1e-12);
        }
        let s = SeminormSample::from_fn(2, 64, |u| u[0].abs()).unwrap();
        assert_eq!(metric_jacobian(&s, 2).unwrap(), 0.0);
        assert!(metric_jacobian(&s, 3).is_err());
    }

    #[test]
    fn anisotropic_jacobian_matches_quadrature() {
        // |(a u1, b u2)| has 𝔍 = 2π / ∫ (a²cos² + b²sin²)^{−1} = ab
        let s = SeminormSample::from_fn(2, 256, |u| ((2.0 * u[0]).powi(2) + (0.5 * u[1]).powi(2)).sqrt()).unwrap();
        assert!((metric_jacobian(&s, 2).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_asymmetric_values() {
        assert!(SeminormSample::new(vec![vec![1.0], vec![-1.0]], vec![1.0, 2.0]).is_err());
        assert!(SeminormSample::new(vec![vec![2.0]], vec![1.0]).is_err());
    }

    #[test]
    fn horizontal_and_vertical_differentials() {
        let s = resolve_structure("heisenberg1").unwrap();
        let est = CcEstimator { structure: &s, options: CcOptions::default() };
        let opts = DifferentialOptions { radii: vec![0.2, 0.1, 0.05, 0.025], cap: 10.0 };
        let horiz = |v: &[f64]| Some(vec![v[0], 0.0, 0.0]);
        let md = metric_differential(&horiz, &est, &[0.0], &[1.0], &opts).unwrap();
        assert!((md.value - 1.0).abs() < 1e-6 && !md.divergent, "{md:?}");
        let vert = |v: &[f64]| Some(vec![0.0, 0.0, v[0]]);
        let opts = DifferentialOptions { radii: vec![0.04, 0.02, 0.01, 0.005, 0.0025], cap: 10.0 };
        let md = metric_differential(&vert, &est, &[0.0], &[1.0], &opts).unwrap();
        assert!(md.divergent, "{md:?}");
    }

    #[test]
    fn flat_horizontal_identity() {
        let s = flat_structure(3, 2).unwrap();
        let est = EtaEstimator { context: EtaContext::new(&s, 2.0, 0.0, Region { center: vec![0.0; 3], radius: 4.0 }).unwrap(), options: EtaOptions::default() };
        let f = |v: &[f64]| Some(vec![v[0], v[1], 0.0]);
        let u = [0.6, -0.8];
        let md = metric_differential(&f, &est, &[0.1, 0.1], &u, &DifferentialOptions::default()).unwrap();
        assert!((md.value - 1.0).abs() < 1e-3, "{md:?}");
    }

    #[test]
    fn too_few_radii() {
        let f = |v: &[f64]| (v[0] <= 0.0).then(|| vec![v[0]]);
        let e = metric_differential(&f, &crate::metrics::EuclideanEstimator, &[0.0], &[1.0], &DifferentialOptions::default());
        assert!(matches!(e, Err(TangencyError::TooFewRadii(0))));
    }
}
