//! Distributions given by polynomial frames, their bracket-generated
//! complements, the catalog of Carnot models, and the V/W projection pair.

mod catalog;
mod complemented;
mod hormander;
pub(crate) mod load;
mod projection;
mod sampling;

pub use catalog::{
    build_catalog_model, flat_structure, free33_algebra, parse_flat_name, CarnotModel, LieAlgebra, RelationCheck,
    CATALOG_NAMES,
};
pub use complemented::{ComplementedStructure, Distribution, IndependenceReport, Recipe};
pub use hormander::{hormander_step, HormanderResult};
pub use load::{load_structure, resolve_structure};
pub use projection::{
    complement_projections, complement_projections_exact, projection_modulus, ExactProjectionPair,
    ModulusEstimate, ProjectionPair, Region,
};
pub use sampling::halton;

use crate::calc::CalcError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StructureError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dependent frame at {point:?} (singular values {singular_values:?})")]
    DependentFrame {
        point: Vec<f64>,
        singular_values: Vec<f64>,
    },
    #[error("singular frame at {0:?}")]
    SingularFrame(Vec<f64>),
    #[error("unknown catalog model {0:?}")]
    UnknownModel(String),
    #[error("invalid bracket recipe: {0}")]
    InvalidRecipe(String),
    #[error("invalid structure: {0}")]
    Invalid(String),
    #[error(transparent)]
    Calc(#[from] CalcError),
}
