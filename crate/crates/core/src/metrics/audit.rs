use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::cc::{cc_distance, CcOptions};
use super::eta::{anisotropic_gauge, eta_distance, EtaContext, EtaOptions};
use super::{euclid, CurveWitness, DistanceEstimate, EstimateStatus, MetricsError};
use crate::structures::{ComplementedStructure, Region};

/// A distance estimator returning certified brackets.
pub trait MetricEstimator: Sync {
    fn name(&self) -> String;
    fn estimate(&self, x: &[f64], y: &[f64]) -> Result<DistanceEstimate, MetricsError>;
}

pub struct CcEstimator<'a> {
    pub structure: &'a ComplementedStructure,
    pub options: CcOptions,
}

impl MetricEstimator for CcEstimator<'_> {
    fn name(&self) -> String {
        "cc".into()
    }

    fn estimate(&self, x: &[f64], y: &[f64]) -> Result<DistanceEstimate, MetricsError> {
        cc_distance(self.structure, x, y, &self.options)
    }
}

pub struct EtaEstimator<'a> {
    pub context: EtaContext<'a>,
    pub options: EtaOptions,
}

impl MetricEstimator for EtaEstimator<'_> {
    fn name(&self) -> String {
        format!("eta({})", self.context.eta())
    }

    fn estimate(&self, x: &[f64], y: &[f64]) -> Result<DistanceEstimate, MetricsError> {
        eta_distance(&self.context, x, y, &self.options)
    }
}

/// The Euclidean distance, exact.
pub struct EuclideanEstimator;

impl MetricEstimator for EuclideanEstimator {
    fn name(&self) -> String {
        "euclidean".into()
    }

    fn estimate(&self, x: &[f64], y: &[f64]) -> Result<DistanceEstimate, MetricsError> {
        let d = euclid(x, y);
        Ok(DistanceEstimate {
            lower: d,
            upper: d,
            witness: CurveWitness::None,
            endpoint_gap: 0.0,
            status: EstimateStatus::Converged,
            method: "euclidean".into(),
            lower_source: "exact".into(),
            budget: 0,
            restarts: 0,
            seed: 0,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SqueezeOptions {
    pub eta: f64,
    /// Base points are drawn from this ball.
    pub region: Region,
    pub bands: usize,
    pub pairs_per_band: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandRow {
    /// Gauge values `g(x,y)` of the band lie in `(band_lo, band_hi]`.
    pub band_lo: f64,
    pub band_hi: f64,
    /// Smallest `C ≥ 1` with `g/C ≤ d ≤ C g` on every used pair (point estimate `d = upper`).
    pub fitted_c: f64,
    /// `max g/d`.
    pub c_lower_side: f64,
    /// `max d/g`.
    pub c_upper_side: f64,
    pub pairs_used: usize,
    pub dropped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SqueezeReport {
    pub metric: String,
    pub eta: f64,
    pub bands: Vec<BandRow>,
    /// `max/min` of the per-band fitted constants.
    pub band_ratio: f64,
    pub overall_c: f64,
}

/// Pair `(x, x+Δ)` with `|Π^V_x Δ| = θg` and `|Π^W_x Δ| = ((1−θ)g)^η`, so the
/// gauge equals `g` exactly.
fn gauge_pair(
    s: &ComplementedStructure,
    x: &[f64],
    g: f64,
    theta: f64,
    eta: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>, MetricsError> {
    let n = s.n();
    let k = s.k();
    let f = s.frame_matrix(x);
    let unit = |v: DVector<f64>| {
        let r = v.norm();
        v / r
    };
    let cv = DVector::from_iterator(k, (0..k).map(|_| rng.random_range(-1.0..1.0)));
    let cw = DVector::from_iterator(n - k, (0..n - k).map(|_| rng.random_range(-1.0..1.0)));
    let v = unit(f.columns(0, k) * cv);
    let w = unit(f.columns(k, n - k) * cw);
    let d = v * (theta * g) + w * ((1.0 - theta) * g).powf(eta);
    Ok(x.iter().zip(d.iter()).map(|(a, b)| a + b).collect())
}

fn sample_in_ball(region: &Region, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = region.center.len();
    loop {
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if u.iter().map(|a| a * a).sum::<f64>() <= 1.0 {
            return region.center.iter().zip(&u).map(|(c, a)| c + region.radius * a).collect();
        }
    }
}

/// Fitted squeezing constants per dyadic band of gauge values.
///
/// Band `j` holds pairs with `g ∈ (R 2^{−j−1}, R 2^{−j}]`, `R` the region
/// radius. Within a band the V/W mixing `θ` runs over an even grid of `[0,1]`.
/// Pairs whose estimate fails or is unconverged are dropped and counted.
pub fn squeeze_audit(
    s: &ComplementedStructure,
    metric: &dyn MetricEstimator,
    opts: &SqueezeOptions,
) -> Result<SqueezeReport, MetricsError> {
    if !(1.0..=2.0).contains(&opts.eta) {
        return Err(MetricsError::Invalid(format!("eta = {} outside [1,2]", opts.eta)));
    }
    if opts.bands == 0 || opts.pairs_per_band == 0 {
        return Err(MetricsError::Invalid("need at least one band and one pair".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let r = opts.region.radius;
    let mut jobs = Vec::new();
    for band in 0..opts.bands {
        let (lo, hi) = (r * 2f64.powi(-(band as i32) - 1), r * 2f64.powi(-(band as i32)));
        for p in 0..opts.pairs_per_band {
            let theta = if opts.pairs_per_band == 1 { 0.5 } else { p as f64 / (opts.pairs_per_band - 1) as f64 };
            let g = lo * (hi / lo).powf(rng.random_range(0.0..1.0)).max(1.0 + 1e-12);
            let x = sample_in_ball(&opts.region, &mut rng);
            let y = gauge_pair(s, &x, g, theta, opts.eta, &mut rng)?;
            jobs.push((band, x, y));
        }
    }
    let outcomes: Vec<(usize, Option<(f64, f64)>)> = jobs
        .par_iter()
        .map(|(band, x, y)| {
            let res = (|| {
                if !s.in_box(y) {
                    return None;
                }
                let g = anisotropic_gauge(s, x, y, opts.eta).ok()?;
                let e = metric.estimate(x, y).ok()?;
                (e.converged() && e.upper > 0.0 && g > 0.0).then_some((g, e.upper))
            })();
            (*band, res)
        })
        .collect();
    let mut bands = Vec::with_capacity(opts.bands);
    for band in 0..opts.bands {
        let (lo, hi) = (r * 2f64.powi(-(band as i32) - 1), r * 2f64.powi(-(band as i32)));
        let mut row = BandRow {
            band_lo: lo,
            band_hi: hi,
            fitted_c: 1.0,
            c_lower_side: 0.0,
            c_upper_side: 0.0,
            pairs_used: 0,
            dropped: 0,
        };
        for (b, o) in &outcomes {
            if *b != band {
                continue;
            }
            match o {
                Some((g, d)) => {
                    row.pairs_used += 1;
                    row.c_lower_side = row.c_lower_side.max(g / d);
                    row.c_upper_side = row.c_upper_side.max(d / g);
                }
                None => row.dropped += 1,
            }
        }
        row.fitted_c = row.c_lower_side.max(row.c_upper_side).max(1.0);
        bands.push(row);
    }
    let used: Vec<f64> = bands.iter().filter(|b| b.pairs_used > 0).map(|b| b.fitted_c).collect();
    let max = used.iter().copied().fold(0.0, f64::max);
    let min = used.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SqueezeReport {
        metric: metric.name(),
        eta: opts.eta,
        bands,
        band_ratio: if used.is_empty() { f64::NAN } else { max / min },
        overall_c: max,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityRow {
    pub eta: f64,
    pub lower: f64,
    pub upper: f64,
    /// `|d_η − d_{η₀}|` on upper estimates.
    pub difference: f64,
    pub envelope: f64,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub eta0: f64,
    pub base_lower: f64,
    pub base_upper: f64,
    /// `C(x,y) = 2 max{1, 2|x−y| + |x−y|^{1/2}}`.
    pub c_xy: f64,
    pub rows: Vec<ContinuityRow>,
    pub dropped: Vec<f64>,
    pub all_within: bool,
    /// Differences are non-decreasing in `|η − η₀|`.
    pub monotone: bool,
}

/// Checks `|d_η − d_{η₀}| ≤ (C^{|η−η₀|/min(η,η₀)} − 1) d_{η₀} + 2(w_η + w_{η₀})`
/// with `w` the bracket widths.
pub fn eta_continuity_audit(
    ctx: &EtaContext<'_>,
    x: &[f64],
    y: &[f64],
    eta0: f64,
    grid: &[f64],
    opts: &EtaOptions,
) -> Result<ContinuityReport, MetricsError> {
    let base = eta_distance(&ctx.with_eta(eta0)?, x, y, opts)?;
    if !base.converged() {
        return Err(MetricsError::Invalid("base estimate did not converge".into()));
    }
    let e = euclid(x, y);
    let c_xy = 2.0 * (2.0 * e + e.sqrt()).max(1.0);
    let results: Vec<(f64, Result<DistanceEstimate, MetricsError>)> = grid
        .par_iter()
        .map(|&eta| (eta, ctx.with_eta(eta).and_then(|c| eta_distance(&c, x, y, opts))))
        .collect();
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    for (eta, r) in results {
        match r {
            Ok(d) if d.converged() => {
                let difference = (d.upper - base.upper).abs();
                let envelope = (c_xy.powf((eta - eta0).abs() / eta.min(eta0)) - 1.0) * base.upper
                    + 2.0 * (d.width() + base.width());
                rows.push(ContinuityRow {
                    eta,
                    lower: d.lower,
                    upper: d.upper,
                    difference,
                    envelope,
                    within: difference <= envelope + 1e-12,
                });
            }
            _ => dropped.push(eta),
        }
    }
    let mut by_gap: Vec<&ContinuityRow> = rows.iter().collect();
    by_gap.sort_by(|a, b| (a.eta - eta0).abs().total_cmp(&(b.eta - eta0).abs()));
    let monotone = by_gap.windows(2).all(|w| w[0].difference <= w[1].difference + 1e-12);
    Ok(ContinuityReport {
        eta0,
        base_lower: base.lower,
        base_upper: base.upper,
        c_xy,
        all_within: rows.iter().all(|r| r.within),
        rows,
        dropped,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{build_catalog_model, flat_structure};

    #[test]
    fn euclidean_fails_two_squeezing_on_heisenberg() {
        let h = build_catalog_model("heisenberg1").unwrap();
        let opts = SqueezeOptions {
            eta: 2.0,
            region: Region { center: vec![0.0; 3], radius: 0.2 },
            bands: 4,
            pairs_per_band: 9,
            seed: 1,
        };
        let r = squeeze_audit(h.structure(), &EuclideanEstimator, &opts).unwrap();
        let first = r.bands[0].fitted_c;
        let last = r.bands[3].fitted_c;
        assert!(last / first >= 4.0, "{r:?}");
    }

    #[test]
    fn flat_pairs_have_exact_gauge() {
        let f = flat_structure(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = gauge_pair(&f, &[0.0; 3], 0.1, 0.3, 2.0, &mut rng).unwrap();
        let g = anisotropic_gauge(&f, &[0.0; 3], &y, 2.0).unwrap();
        assert!((g - 0.1).abs() < 1e-14);
    }

    #[test]
    fn continuity_envelope_on_flat_vertical_pair() {
        let f = flat_structure(3, 2).unwrap();
        let ctx = EtaContext::new(&f, 2.0, 0.0, Region { center: vec![0.0; 3], radius: 4.0 }).unwrap();
        let r = eta_continuity_audit(&ctx, &[0.0; 3], &[0.0, 0.0, 0.01], 2.0, &[2.0, 1.5], &EtaOptions::default()).unwrap();
        assert!(r.rows[0].difference < 1e-12 && r.rows[0].within);
        let exact = (0.01f64.powf(1.0 / 1.5) - 0.1).abs();
        assert!((r.rows[1].difference - exact).abs() < 1e-9);
        // d_2/d_1.5 = w^{1/2 − 2/3} is unbounded as w → 0, so the envelope
        // 2^{1/3} cannot hold in this direction
        assert!(!r.rows[1].within);
    }
}
