use std::collections::HashSet;

use serde::Serialize;

use super::TangencyError;
use crate::metrics::MetricEstimator;
use crate::stats::{linear_fit, LinearFit};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub dimension: f64,
    pub stderr: f64,
    /// `dimension ± 2·stderr`.
    pub band: (f64, f64),
    /// `(ε, N(ε))` per scale.
    pub counts: Vec<(f64, usize)>,
}

/// Occupied cells of side `ε`, anchored at the bounding-box corner. The cell
/// grid has `⌈L/ε⌉` cells per axis, so points on the far face share the last cell.
fn occupied(points: &[Vec<f64>], lo: &[f64], hi: &[f64], eps: f64) -> usize {
    let cap: Vec<i64> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| (((b - a) / eps).ceil() as i64 - 1).max(0))
        .collect();
    let cells: HashSet<Vec<i64>> = points
        .iter()
        .map(|p| {
            p.iter()
                .zip(lo)
                .zip(&cap)
                .map(|((x, a), c)| (((x - a) / eps).floor() as i64).min(*c))
                .collect()
        })
        .collect();
    cells.len()
}

/// Least-squares slope of `log N(ε)` against `log(1/ε)`.
pub fn box_counting_dimension(points: &[Vec<f64>], scales: &[f64]) -> Result<DimensionEstimate, TangencyError> {
    if points.is_empty() {
        return Err(TangencyError::EmptyCloud);
    }
    if scales.len() < 2 || scales.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(TangencyError::Invalid("need at least two positive scales".into()));
    }
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(TangencyError::Invalid("points of mixed dimension".into()));
    }
    let lo: Vec<f64> = (0..d).map(|i| points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..d).map(|i| points.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let counts: Vec<(f64, usize)> = scales.iter().map(|&e| (e, occupied(points, &lo, &hi, e))).collect();
    let xs: Vec<f64> = counts.iter().map(|(e, _)| -e.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|(_, c)| (*c as f64).ln()).collect();
    let LinearFit { slope, slope_se, .. } =
        linear_fit(&xs, &ys).ok_or_else(|| TangencyError::Invalid("scales must be distinct".into()))?;
    Ok(DimensionEstimate {
        dimension: slope,
        stderr: slope_se,
        band: (slope - 2.0 * slope_se, slope + 2.0 * slope_se),
        counts,
    })
}

/// `ε_j = extent · 2^{−j}`, `j = 1..=count`.
pub fn dyadic_scales(extent: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|j| extent * 0.5f64.powi(j as i32)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Premeasure {
    /// `Σ δ_cov^m` over the covering balls.
    pub value: f64,
    pub balls: usize,
    pub delta_cov: f64,
    pub m: f64,
    /// Covers by balls bound the spherical premeasure, which exceeds the
    /// Hausdorff premeasure by at most this factor (`2^m`).
    pub spherical_factor: f64,
    /// Pairs whose distance estimate failed or did not converge.
    pub dropped: usize,
}

/// Greedy cover of `points` by metric balls of diameter at most `δ_cov`.
///
/// Points are taken in lexicographic order. For the first uncovered point
/// `p`, the center is the last uncovered point within `δ_cov/2` of `p`, and
/// the ball of radius `δ_cov/2` about it removes every uncovered point it
/// holds. Pairs further apart than `δ_cov/2` in the Euclidean distance are
/// skipped when `euclidean_prefilter` is set, which is sound for metrics
/// dominating the Euclidean one.
pub fn hausdorff_premeasure(
    points: &[Vec<f64>],
    metric: &dyn MetricEstimator,
    m: f64,
    delta_cov: f64,
    euclidean_prefilter: bool,
) -> Result<Premeasure, TangencyError> {
    if !(m > 0.0) || !(delta_cov > 0.0) {
        return Err(TangencyError::Invalid("need m > 0 and δ_cov > 0".into()));
    }
    let mut order: Vec<&Vec<f64>> = points.iter().collect();
    order.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order.dedup();
    let r = 0.5 * delta_cov;
    let mut covered = vec![false; order.len()];
    let mut dropped = 0;
    let mut balls = 0;
    let within = |a: &[f64], b: &[f64], dropped: &mut usize| -> bool {
        if a == b {
            return true;
        }
        if euclidean_prefilter && crate::metrics::euclid(a, b) > r {
            return false;
        }
        match metric.estimate(a, b) {
            Ok(e) if e.converged() => e.upper <= r,
            _ => {
                *dropped += 1;
                false
            }
        }
    };
    for i in 0..order.len() {
        if covered[i] {
            continue;
        }
        let p = order[i];
        let mut center = i;
        for j in i + 1..order.len() {
            if !covered[j] && within(p, order[j], &mut dropped) {
                center = j;
            }
        }
        let c = order[center];
        for j in i..order.len() {
            if !covered[j] && (j == i || j == center || within(c, order[j], &mut dropped)) {
                covered[j] = true;
            }
        }
        balls += 1;
    }
    Ok(Premeasure {
        value: balls as f64 * delta_cov.powf(m),
        balls,
        delta_cov,
        m,
        spherical_factor: 2f64.powf(m),
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{CcEstimator, CcOptions, EuclideanEstimator};
    use crate::structures::resolve_structure;

    fn grid_square(m: usize) -> Vec<Vec<f64>> {
        let mut v = Vec::new();
        for i in 0..m {
            for j in 0..m {
                v.push(vec![i as f64 / (m - 1) as f64, j as f64 / (m - 1) as f64]);
            }
        }
        v
    }

    #[test]
    fn counting_oracles() {
        let scales = dyadic_scales(1.0, 5);
        let point = box_counting_dimension(&[vec![0.3, 0.3]], &scales).unwrap();
        assert!(point.dimension.abs() < 0.05);
        let line: Vec<Vec<f64>> = (0..257).map(|i| vec![i as f64 / 256.0, 0.0]).collect();
        let d = box_counting_dimension(&line, &scales).unwrap();
        assert!((d.dimension - 1.0).abs() < 0.1, "{d:?}");
        let d = box_counting_dimension(&grid_square(129), &scales).unwrap();
        assert!((d.dimension - 2.0).abs() < 0.1, "{d:?}");
    }

    #[test]
    fn counting_errors() {
        assert!(matches!(box_counting_dimension(&[], &[0.1, 0.2]), Err(TangencyError::EmptyCloud)));
        assert!(box_counting_dimension(&[vec![0.0]], &[0.1]).is_err());
    }

    #[test]
    fn euclidean_segment_premeasure() {
        let seg: Vec<Vec<f64>> = (0..=1000).map(|i| vec![i as f64 / 1000.0]).collect();
        let p = hausdorff_premeasure(&seg, &EuclideanEstimator, 1.0, 0.1, true).unwrap();
        assert!((p.value - 1.0).abs() <= 0.1 + 1e-12, "{p:?}");
        let empty = hausdorff_premeasure(&[], &EuclideanEstimator, 1.0, 0.1, true).unwrap();
        assert_eq!(empty.value, 0.0);
    }

    #[test]
    fn horizontal_segment_has_small_area_premeasure() {
        let s = resolve_structure("heisenberg1").unwrap();
        let est = CcEstimator { structure: &s, options: CcOptions::default() };
        let seg: Vec<Vec<f64>> = (0..=200).map(|i| vec![i as f64 / 200.0, 0.0, 0.0]).collect();
        let coarse = hausdorff_premeasure(&seg, &est, 2.0, 0.1, true).unwrap();
        let fine = hausdorff_premeasure(&seg, &est, 2.0, 0.05, true).unwrap();
        assert!(fine.value <= 0.2 && fine.value < coarse.value, "{coarse:?} {fine:?}");
        assert_eq!(fine.dropped, 0);
    }
}
