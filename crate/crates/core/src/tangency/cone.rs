use nalgebra::DMatrix;
use serde::Serialize;

use super::TangencyError;
use crate::metrics::euclid;
use crate::structures::ComplementedStructure;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeFit {
    /// `max |(I − P_V(p)) (q − p)| / |q − p|²` over the sampled pairs.
    pub c_fitted: f64,
    pub pairs: usize,
    pub worst_pair: Option<(usize, usize)>,
}

/// Deviation of chords from the plane field, quadratic in the chord length.
///
/// For every ordered pair of `points` (samples of a horizontal curve) with
/// `0 < |q − p| ≤ max_separation` the component of `q − p` orthogonal to
/// `V(p)` is compared with `|q − p|²`. The CC distance dominates the
/// Euclidean one, so the fitted constant also bounds the ratio against `d_V²`.
pub fn cone_inclusion_fit(
    s: &ComplementedStructure,
    points: &[Vec<f64>],
    max_separation: f64,
) -> Result<ConeFit, TangencyError> {
    let n = s.n();
    let mut projectors = Vec::with_capacity(points.len());
    for p in points {
        if p.len() != n {
            return Err(TangencyError::Dimension { expected: n, found: p.len() });
        }
        let v = s.frame_matrix(p).columns(0, s.k()).into_owned();
        let qv = v.clone().qr().q().columns(0, s.k()).into_owned();
        projectors.push(DMatrix::<f64>::identity(n, n) - &qv * qv.transpose());
    }
    let mut fit = ConeFit { c_fitted: 0.0, pairs: 0, worst_pair: None };
    for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            let d = euclid(p, q);
            if i == j || !(d > 0.0 && d <= max_separation) {
                continue;
            }
            let chord = nalgebra::DVector::from_iterator(n, q.iter().zip(p).map(|(a, b)| a - b));
            let ratio = (&projectors[i] * chord).norm() / (d * d);
            fit.pairs += 1;
            if ratio > fit.c_fitted {
                fit.c_fitted = ratio;
                fit.worst_pair = Some((i, j));
            }
        }
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ControlPath;
    use crate::structures::resolve_structure;

    #[test]
    fn horizontal_arc_chords_are_quadratically_close() {
        let s = resolve_structure("heisenberg1").unwrap();
        let segs = (0..16)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / 64.0;
                (vec![a.cos(), a.sin()], 0.02)
            })
            .collect();
        let traj = ControlPath::new(vec![0.0; 3], segs).unwrap().integrate(&s, 8).unwrap();
        let fit = cone_inclusion_fit(&s, &traj.knots, 0.5).unwrap();
        assert!(fit.pairs > 0);
        assert!(fit.c_fitted.is_finite() && fit.c_fitted < 2.0, "{fit:?}");
        let line: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 0.01, 0.0, 0.0]).collect();
        assert!(cone_inclusion_fit(&s, &line, 1.0).unwrap().c_fitted < 1e-12);
    }
}
