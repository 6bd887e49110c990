use serde::Serialize;

use super::MetricsError;
use crate::structures::ComplementedStructure;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Piecewise-constant horizontal controls: on segment `i` the curve follows
/// `Σ_j u_j X_j` for the segment's duration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControlPath {
    pub start: Vec<f64>,
    pub segments: Vec<(Vec<f64>, f64)>,
}

/// Endpoint and ambient Euclidean length of an integrated control path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub end: Vec<f64>,
    pub length: f64,
    /// Start point of each segment, plus the end point.
    pub knots: Vec<Vec<f64>>,
}

impl ControlPath {
    pub fn new(start: Vec<f64>, segments: Vec<(Vec<f64>, f64)>) -> Result<Self, MetricsError> {
        if let Some((_, d)) = segments.iter().find(|(_, d)| !(*d > 0.0)) {
            return Err(MetricsError::Invalid(format!("segment duration {d} is not positive")));
        }
        if let Some(k) = segments.first().map(|(u, _)| u.len()) {
            if segments.iter().any(|(u, _)| u.len() != k) {
                return Err(MetricsError::Invalid("controls of different dimensions".into()));
            }
        }
        Ok(ControlPath { start, segments })
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|(_, d)| d).sum()
    }

    /// RK4 on `(x, ℓ)` with `ℓ' = |Σ u_j X_j(x)|`, `substeps` steps per segment.
    pub fn integrate(&self, s: &ComplementedStructure, substeps: usize) -> Result<Trajectory, MetricsError> {
        let n = s.n();
        if self.start.len() != n {
            return Err(MetricsError::Dimension { expected: n, found: self.start.len() });
        }
        if let Some((u, _)) = self.segments.iter().find(|(u, _)| u.len() != s.k()) {
            return Err(MetricsError::Dimension { expected: s.k(), found: u.len() });
        }
        let frame = s.compiled();
        let [lo, hi] = s.working_box();
        let substeps = substeps.max(1);
        let mut x = self.start.clone();
        let mut length = 0.0;
        let mut knots = Vec::with_capacity(self.segments.len() + 1);
        let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut tmp = vec![0.0; n];
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        for (u, dur) in &self.segments {
            knots.push(x.clone());
            let h = dur / substeps as f64;
            for _ in 0..substeps {
                frame.combo(u, &x, &mut k[0]);
                for i in 0..n {
                    tmp[i] = x[i] + 0.5 * h * k[0][i];
                }
                frame.combo(u, &tmp, &mut k[1]);
                for i in 0..n {
                    tmp[i] = x[i] + 0.5 * h * k[1][i];
                }
                frame.combo(u, &tmp, &mut k[2]);
                for i in 0..n {
                    tmp[i] = x[i] + h * k[2][i];
                }
                frame.combo(u, &tmp, &mut k[3]);
                let speeds: Vec<f64> = k.iter().map(|v| norm(v)).collect();
                length += h / 6.0 * (speeds[0] + 2.0 * speeds[1] + 2.0 * speeds[2] + speeds[3]);
                for i in 0..n {
                    x[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
                }
                if x.iter().any(|&v| !(v >= lo && v <= hi)) {
                    return Err(MetricsError::ExitedBox(x));
                }
            }
        }
        knots.push(x.clone());
        Ok(Trajectory { end: x, length, knots })
    }
}

/// Piecewise-linear curve on `[0,1]` through `vertices` at `times`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolygonalCurve {
    vertices: Vec<Vec<f64>>,
    times: Vec<f64>,
}

impl PolygonalCurve {
    pub fn new(vertices: Vec<Vec<f64>>, times: Vec<f64>) -> Result<Self, MetricsError> {
        if vertices.len() < 2 {
            return Err(MetricsError::Invalid("a polygonal curve needs at least 2 vertices".into()));
        }
        if times.len() != vertices.len() {
            return Err(MetricsError::Invalid("one time per vertex".into()));
        }
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 {
            return Err(MetricsError::Invalid("time grid must start at 0 and end at 1".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MetricsError::Invalid("time grid must be strictly increasing".into()));
        }
        let n = vertices[0].len();
        if vertices.iter().any(|v| v.len() != n || v.iter().any(|c| !c.is_finite())) {
            return Err(MetricsError::Invalid("vertices must be finite points of one dimension".into()));
        }
        Ok(PolygonalCurve { vertices, times })
    }

    /// Straight segment from `x` to `y` at constant speed.
    pub fn segment(x: &[f64], y: &[f64]) -> Result<Self, MetricsError> {
        Self::new(vec![x.to_vec(), y.to_vec()], vec![0.0, 1.0])
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn segments(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn velocity(&self, i: usize) -> Vec<f64> {
        let dt = self.times[i + 1] - self.times[i];
        self.vertices[i + 1]
            .iter()
            .zip(&self.vertices[i])
            .map(|(b, a)| (b - a) / dt)
            .collect()
    }

    pub fn velocities(&self) -> Vec<Vec<f64>> {
        (0..self.segments()).map(|i| self.velocity(i)).collect()
    }

    pub fn lipschitz(&self) -> f64 {
        self.velocities()
            .iter()
            .map(|v| v.iter().map(|a| a * a).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn euclidean_length(&self) -> f64 {
        self.vertices.windows(2).map(|w| dist(&w[0], &w[1])).sum()
    }

    pub fn point_at(&self, t: f64) -> Vec<f64> {
        let t = t.clamp(0.0, 1.0);
        let i = self.times.partition_point(|&s| s <= t).saturating_sub(1).min(self.segments() - 1);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let s = (t - t0) / (t1 - t0);
        self.vertices[i]
            .iter()
            .zip(&self.vertices[i + 1])
            .map(|(a, b)| a + s * (b - a))
            .collect()
    }
}

/// Limits of difference quotients straddling a parameter value.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivedSet {
    Singleton(Vec<f64>),
    /// The closed convex segment between two velocities.
    Segment(Vec<f64>, Vec<f64>),
}

impl DerivedSet {
    pub fn diameter(&self) -> f64 {
        match self {
            DerivedSet::Singleton(_) => 0.0,
            DerivedSet::Segment(a, b) => dist(a, b),
        }
    }

    pub fn extreme_points(&self) -> Vec<&[f64]> {
        match self {
            DerivedSet::Singleton(v) => vec![v],
            DerivedSet::Segment(a, b) => vec![a, b],
        }
    }

    /// Membership up to `tol` in the Euclidean distance.
    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        match self {
            DerivedSet::Singleton(a) => dist(a, v) <= tol,
            DerivedSet::Segment(a, b) => {
                let d: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
                let dd: f64 = d.iter().map(|x| x * x).sum();
                let lam = if dd == 0.0 {
                    0.0
                } else {
                    (v.iter().zip(a).zip(&d).map(|((p, q), r)| (p - q) * r).sum::<f64>() / dd).clamp(0.0, 1.0)
                };
                let p: Vec<f64> = a.iter().zip(&d).map(|(q, r)| q + lam * r).collect();
                dist(&p, v) <= tol
            }
        }
    }
}

/// Derived set of a polygonal curve at `t`.
pub fn derived_set(curve: &PolygonalCurve, t: f64) -> Result<DerivedSet, MetricsError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(MetricsError::Invalid(format!("parameter {t} outside [0,1]")));
    }
    let m = curve.segments();
    if t == 0.0 {
        return Ok(DerivedSet::Singleton(curve.velocity(0)));
    }
    if t == 1.0 {
        return Ok(DerivedSet::Singleton(curve.velocity(m - 1)));
    }
    let times = curve.times();
    if let Some(i) = (1..m).find(|&i| times[i] == t) {
        let (a, b) = (curve.velocity(i - 1), curve.velocity(i));
        return Ok(if a == b { DerivedSet::Singleton(a) } else { DerivedSet::Segment(a, b) });
    }
    let i = times.partition_point(|&s| s < t) - 1;
    Ok(DerivedSet::Singleton(curve.velocity(i)))
}

/// A parameter where `0` lies in the derived set of `t ↦ ⟨γ(t), w⟩`, for a
/// closed curve. Found from sign changes of the segment slopes.
pub fn mean_value_point(curve: &PolygonalCurve, w: &[f64]) -> Option<f64> {
    let slopes: Vec<f64> = curve
        .velocities()
        .iter()
        .map(|v| v.iter().zip(w).map(|(a, b)| a * b).sum())
        .collect();
    let times = curve.times();
    if let Some(i) = slopes.iter().position(|&s| s == 0.0) {
        return Some(0.5 * (times[i] + times[i + 1]));
    }
    (1..slopes.len())
        .find(|&i| slopes[i - 1].signum() != slopes[i].signum())
        .map(|i| times[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::build_catalog_model;

    #[test]
    fn derived_sets_of_polygon() {
        let c = PolygonalCurve::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]],
            vec![0.0, 0.5, 1.0],
        )
        .unwrap();
        assert_eq!(derived_set(&c, 0.25).unwrap(), DerivedSet::Singleton(vec![2.0, 0.0]));
        let d = derived_set(&c, 0.5).unwrap();
        assert_eq!(d, DerivedSet::Segment(vec![2.0, 0.0], vec![0.0, 2.0]));
        assert!(d.contains(&[1.0, 1.0], 1e-12));
        assert!(!d.contains(&[2.0, 2.0], 1e-3));
        assert!(d.diameter() <= 2.0 * c.lipschitz());
        assert_eq!(derived_set(&c, 1.0).unwrap(), DerivedSet::Singleton(vec![0.0, 2.0]));
        let constant = PolygonalCurve::segment(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(derived_set(&constant, 0.3).unwrap(), DerivedSet::Singleton(vec![0.0, 0.0]));
    }

    #[test]
    fn rejects_bad_time_grids() {
        let v = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert!(PolygonalCurve::new(v.clone(), vec![0.0, 0.5, 0.9]).is_err());
        assert!(PolygonalCurve::new(v.clone(), vec![0.0, 0.5, 0.5]).is_err());
        assert!(PolygonalCurve::new(v[..1].to_vec(), vec![0.0]).is_err());
    }

    #[test]
    fn mean_value_on_closed_square() {
        let c = PolygonalCurve::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]],
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
        )
        .unwrap();
        let t = mean_value_point(&c, &[0.3, 1.0]).unwrap();
        let slopes: Vec<f64> = c.velocities().iter().map(|v| 0.3 * v[0] + v[1]).collect();
        let i = c.times().iter().position(|&s| s == t).unwrap();
        assert!(slopes[i - 1].min(slopes[i]) <= 0.0 && slopes[i - 1].max(slopes[i]) >= 0.0);
    }

    #[test]
    fn heisenberg_horizontal_control_length() {
        let h = build_catalog_model("heisenberg1").unwrap();
        let p = ControlPath::new(vec![0.0; 3], vec![(vec![1.0, 0.0], 0.5), (vec![0.0, 1.0], 0.5)]).unwrap();
        let tr = p.integrate(h.structure(), 8).unwrap();
        // second leg at x = 1/2 has speed sqrt(1 + 1/16)
        let expected = 0.5 + 0.5 * (1.0f64 + 1.0 / 16.0).sqrt();
        assert!((tr.length - expected).abs() < 1e-12);
        assert!((tr.end[2] - 0.125).abs() < 1e-12);
    }
}
