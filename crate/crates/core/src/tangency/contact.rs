use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::{SurfaceGraph, TangencyError};
use crate::calc::{f64_to_rational, RatMatrix};
use crate::structures::ComplementedStructure;

/// Deficiencies at or below this value are confirmed or refuted in exact arithmetic.
pub const EXACT_CHECK_BELOW: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Deficiency {
    pub delta: f64,
    /// `Some(contained)` when the exact containment test ran.
    pub exact: Option<bool>,
}

fn orthonormal_columns(m: DMatrix<f64>) -> Result<DMatrix<f64>, ()> {
    let cols = m.ncols();
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax.max(1.0)) {
        return Err(());
    }
    let qr = m.qr();
    Ok(qr.q().columns(0, cols).into_owned())
}

/// `δ(q) = ‖(I − P_V) Q_T‖₂` with `Q_T` an orthonormal basis of the tangent
/// space of the graph at `Φ(q)` and `P_V` the orthogonal projection onto
/// `V(Φ(q))`: the sine of the largest principal angle between the tangent
/// space and `V`.
pub fn contact_deficiency(
    s: &ComplementedStructure,
    surf: &SurfaceGraph,
    q: &[f64],
) -> Result<Deficiency, TangencyError> {
    if surf.ambient() != s.n() {
        return Err(TangencyError::Dimension { expected: s.n(), found: surf.ambient() });
    }
    if q.len() != surf.parameters() {
        return Err(TangencyError::Dimension { expected: surf.parameters(), found: q.len() });
    }
    let x = surf.point(q);
    if !s.in_box(&x) {
        return Err(TangencyError::OutsideBox(x));
    }
    let (n, k) = (s.n(), s.k());
    let v = s.frame_matrix(&x).columns(0, k).into_owned();
    let qv = orthonormal_columns(v).map_err(|_| TangencyError::SingularFrame(x.clone()))?;
    let t = surf.tangent(q);
    let tm = DMatrix::from_fn(n, t.len(), |i, j| t[j][i]);
    let qt = orthonormal_columns(tm).map_err(|_| TangencyError::Invalid("degenerate tangent".into()))?;
    let r = &qt - &qv * (qv.transpose() * &qt);
    let mut delta = r.svd(false, false).singular_values.max().min(1.0);
    let mut exact = None;
    if delta <= EXACT_CHECK_BELOW {
        let contained = exact_containment(s, surf, q)?;
        exact = Some(contained);
        delta = if contained { 0.0 } else { delta.max(f64::MIN_POSITIVE) };
    }
    Ok(Deficiency { delta, exact })
}

/// `Tan ⊆ V` in rational arithmetic at the exact binary value of `q`.
fn exact_containment(s: &ComplementedStructure, surf: &SurfaceGraph, q: &[f64]) -> Result<bool, TangencyError> {
    let qr = q.iter().map(|&a| f64_to_rational(a)).collect::<Result<Vec<_>, _>>()?;
    let x = surf.point_exact(&qr)?;
    let frame = s.frame_matrix_exact(&x)?;
    let mut cols: Vec<_> = (0..s.k()).map(|j| frame.column(j)).collect();
    let rv = RatMatrix::from_columns(&cols).rank();
    cols.extend(surf.tangent_exact(&qr)?);
    Ok(RatMatrix::from_columns(&cols).rank() == rv)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Exact zeros, then decades `[10^e, 10^{e+1})` for `e = −16..0`; smaller
/// positive values fall in the first decade, `δ = 1` in the last.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub exact_zero: usize,
    pub bins: Vec<HistogramBin>,
}

impl Histogram {
    pub fn of(values: &[f64]) -> Self {
        let mut bins: Vec<HistogramBin> = (-16..0)
            .map(|e| HistogramBin { lo: 10f64.powi(e), hi: 10f64.powi(e + 1), count: 0 })
            .collect();
        let mut exact_zero = 0;
        for &v in values {
            if v == 0.0 {
                exact_zero += 1;
                continue;
            }
            let e = (v.log10().floor() as i32).clamp(-16, -1);
            bins[(e + 16) as usize].count += 1;
        }
        Self { exact_zero, bins }
    }
}

/// Deficiencies over a tensor grid of the surface domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContactCloud {
    pub surface: String,
    pub tau: f64,
    pub per_axis: usize,
    /// All grid points, row-major in the parameter coordinates.
    pub points: Vec<Vec<f64>>,
    pub deficiencies: Vec<f64>,
    /// Indices of the grid points with `δ ≤ τ`.
    pub contact: Vec<usize>,
    pub exact_checks: usize,
    pub histogram: Histogram,
}

impl ContactCloud {
    pub fn contact_points(&self) -> Vec<Vec<f64>> {
        self.contact.iter().map(|&i| self.points[i].clone()).collect()
    }
}

/// `i`-th of `m` evenly spaced points of `[lo, hi]`, endpoints exact.
pub fn grid_coordinate(lo: f64, hi: f64, i: usize, m: usize) -> f64 {
    let d = (m - 1) as f64;
    (lo * (d - i as f64) + hi * i as f64) / d
}

pub fn contact_set(
    s: &ComplementedStructure,
    surf: &SurfaceGraph,
    per_axis: usize,
    tau: f64,
) -> Result<ContactCloud, TangencyError> {
    if per_axis < 2 {
        return Err(TangencyError::Invalid("grid needs at least 2 points per axis".into()));
    }
    if !(tau >= 0.0) {
        return Err(TangencyError::Invalid(format!("threshold {tau} must be non-negative")));
    }
    let kp = surf.parameters();
    let total = per_axis
        .checked_pow(kp as u32)
        .filter(|&t| t <= 50_000_000)
        .ok_or_else(|| TangencyError::Invalid("grid too large".into()))?;
    let points: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            let mut u = vec![0.0; kp];
            for a in (0..kp).rev() {
                let [lo, hi] = surf.domain()[a];
                u[a] = grid_coordinate(lo, hi, idx % per_axis, per_axis);
                idx /= per_axis;
            }
            u
        })
        .collect();
    let defs = points
        .par_iter()
        .map(|u| contact_deficiency(s, surf, u))
        .collect::<Result<Vec<_>, _>>()?;
    let exact_checks = defs.iter().filter(|d| d.exact.is_some()).count();
    let deficiencies: Vec<f64> = defs.into_iter().map(|d| d.delta).collect();
    let contact = (0..total).filter(|&i| deficiencies[i] <= tau).collect();
    Ok(ContactCloud {
        surface: surf.name().to_string(),
        tau,
        per_axis,
        histogram: Histogram::of(&deficiencies),
        points,
        deficiencies,
        contact,
        exact_checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::resolve_structure;

    fn heis() -> ComplementedStructure {
        resolve_structure("heisenberg1").unwrap()
    }

    #[test]
    fn saddle_contact_on_axis() {
        let s = heis();
        let d = contact_deficiency(&s, &SurfaceGraph::saddle(), &[0.37, 0.0]).unwrap();
        assert_eq!(d.delta, 0.0);
        assert_eq!(d.exact, Some(true));
        let d = contact_deficiency(&s, &SurfaceGraph::saddle(), &[0.37, 0.2]).unwrap();
        assert!(d.delta > 0.05);
    }

    #[test]
    fn plane_deficiency_off_origin() {
        let s = heis();
        let d = contact_deficiency(&s, &SurfaceGraph::plane(), &[0.0, 1.0]).unwrap();
        // normal (0,0,1) of the plane against V spanned by (1,0,−1/2), (0,1,0)
        let expected = 0.5 / (1.25f64).sqrt();
        assert!((d.delta - expected).abs() < 1e-12, "{}", d.delta);
        assert_eq!(contact_deficiency(&s, &SurfaceGraph::plane(), &[0.0, 0.0]).unwrap().delta, 0.0);
    }

    #[test]
    fn saddle_cloud_is_the_axis() {
        let c = contact_set(&heis(), &SurfaceGraph::saddle(), 41, 1e-6).unwrap();
        let pts = c.contact_points();
        assert_eq!(pts.len(), 41);
        assert!(pts.iter().all(|p| p[1] == 0.0));
        assert_eq!(c.histogram.exact_zero, 41);
    }

    #[test]
    fn large_threshold_takes_everything() {
        let c = contact_set(&heis(), &SurfaceGraph::plane(), 11, 1.0).unwrap();
        assert_eq!(c.contact.len(), 121);
    }
}
