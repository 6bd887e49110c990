//! Estimators for the Carnot-Carathéodory distance `d_V` and the η-box
//! distance `d_{V,η}`, with certified brackets and squeezing audits.

mod audit;
mod cc;
mod curves;
mod eta;
pub mod oracle;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub use audit::{
    eta_continuity_audit, squeeze_audit, BandRow, ContinuityReport, ContinuityRow, CcEstimator, EtaEstimator,
    EuclideanEstimator, MetricEstimator, SqueezeOptions, SqueezeReport,
};
pub use cc::{cc_distance, CcOptions};
pub use curves::{derived_set, mean_value_point, ControlPath, DerivedSet, PolygonalCurve, Trajectory};
pub use eta::{
    anisotropic_gauge, eta_distance, eta_length, hull_lower_bound, EtaContext, EtaLength, EtaOptions,
};

use crate::structures::{ComplementedStructure, StructureError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("point outside the working box: {0:?}")]
    OutsideBox(Vec<f64>),
    #[error("trajectory left the working box at {0:?}")]
    ExitedBox(Vec<f64>),
    #[error("projection singular at {0:?}")]
    SingularProjection(Vec<f64>),
    #[error("the distribution does not satisfy the Hörmander condition at {0:?}")]
    NotBracketGenerating(Vec<f64>),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateStatus {
    Converged,
    /// No admissible path met the endpoint tolerance; `upper` is not certified.
    UpperOnlyUnconverged,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveWitness {
    None,
    Control(ControlPath),
    Polygon(PolygonalCurve),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceEstimate {
    pub lower: f64,
    pub upper: f64,
    pub witness: CurveWitness,
    pub endpoint_gap: f64,
    pub status: EstimateStatus,
    pub method: String,
    /// Which bound produced `lower`.
    pub lower_source: String,
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl DistanceEstimate {
    pub fn converged(&self) -> bool {
        self.status == EstimateStatus::Converged
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub(crate) fn zero(method: &str, x: &[f64]) -> Self {
        DistanceEstimate {
            lower: 0.0,
            upper: 0.0,
            witness: CurveWitness::Polygon(PolygonalCurve::segment(x, x).expect("valid segment")),
            endpoint_gap: 0.0,
            status: EstimateStatus::Converged,
            method: method.to_string(),
            lower_source: "identity".into(),
            budget: 0,
            restarts: 0,
            seed: 0,
        }
    }
}

/// Oblique splitting `v = Π^V v + Π^W v` at a fixed point, from an LU
/// factorisation of the full frame.
pub(crate) struct LocalSplit {
    frame: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    k: usize,
}

impl LocalSplit {
    pub(crate) fn at(s: &ComplementedStructure, p: &[f64]) -> Result<Self, MetricsError> {
        let frame = s.frame_matrix(p);
        let lu = frame.clone().lu();
        if !lu.is_invertible() {
            return Err(MetricsError::SingularProjection(p.to_vec()));
        }
        Ok(LocalSplit { frame, lu, k: s.k() })
    }

    /// `(|Π^V v|, |Π^W v|)`.
    pub(crate) fn norms(&self, v: &[f64]) -> (f64, f64) {
        let v = DVector::from_column_slice(v);
        let c = self.lu.solve(&v).unwrap_or_else(|| DVector::zeros(v.len()));
        let pv = self.frame.columns(0, self.k) * c.rows(0, self.k);
        let a = pv.norm();
        let b = (v - pv).norm();
        (a, b)
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub(crate) fn check_point(s: &ComplementedStructure, x: &[f64]) -> Result<(), MetricsError> {
    if x.len() != s.n() {
        return Err(MetricsError::Dimension { expected: s.n(), found: x.len() });
    }
    if !s.in_box(x) {
        return Err(MetricsError::OutsideBox(x.to_vec()));
    }
    Ok(())
}
