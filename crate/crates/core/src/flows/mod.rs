//! Flows of polynomial fields, the exponential chart `Exp_ζ`, anisotropic
//! boxes and cones, and ball-box exponent fits.

mod chart;
mod gauge;
mod integrator;

pub use chart::{ballbox_exponent_fit, fit_openness, geometric_scales, DistanceOracle, ExpChart, ExponentFit, InversionResult, OpennessReport, ScaleRow};
pub use gauge::{gauge_membership, GaugeKind, GaugeSpec};
pub use integrator::{flow_point, integrate, FlowResult, DEFAULT_STEP};

use crate::structures::StructureError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("trajectory left the working box at time {time} near {point:?}")]
    ExitedBox { time: f64, point: Vec<f64> },
    #[error("|t| = {norm} exceeds the chart radius {radius}")]
    RadiusExceeded { norm: f64, radius: f64 },
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("inversion did not converge (residual {residual} after {iterations} iterations)")]
    NotConverged { residual: f64, iterations: usize },
    #[error(transparent)]
    Structure(#[from] StructureError),
}
