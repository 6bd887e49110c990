//! Contact sets of polynomial graphs with a plane field, box-counting and
//! metric premeasure probes, metric differentials and Jacobians.

mod cone;
mod contact;
mod dimension;
mod differential;
mod surface;

pub use cone::{cone_inclusion_fit, ConeFit};
pub use contact::{
    contact_deficiency, contact_set, grid_coordinate, ContactCloud, Deficiency, Histogram, HistogramBin,
    EXACT_CHECK_BELOW,
};
pub use dimension::{box_counting_dimension, dyadic_scales, hausdorff_premeasure, DimensionEstimate, Premeasure};
pub use differential::{
    metric_differential, metric_jacobian, sphere_grid, DifferentialOptions, MetricDifferential, SeminormSample,
    DEGENERATE_SEMINORM,
};
pub use surface::{SurfaceGraph, SurfaceSummary};

use crate::calc::CalcError;
use crate::metrics::MetricsError;
use crate::structures::StructureError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TangencyError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("surface point {0:?} outside the working box")]
    OutsideBox(Vec<f64>),
    #[error("singular distribution frame at {0:?}")]
    SingularFrame(Vec<f64>),
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("only {0} admissible radii")]
    TooFewRadii(usize),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Calc(#[from] CalcError),
}
