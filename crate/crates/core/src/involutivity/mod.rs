//! Pointwise non-involutivity, h-non-involutivity and the minimal
//! non-involutivity order, decided through the bracket form `B_x`.
//!
//! `V` is taken to be h-non-involutive at `x` when no h-dimensional subspace
//! `W₀ ⊆ V(x)` satisfies `B_x(W₀, W₀) = 0` (the pointwise-B reduction).

mod bracket_form;
mod grid;
mod search;

pub use bracket_form::{bracket_form, BracketForm};
pub use grid::{grid_oracle, GridOracleResult};
pub use search::{
    h_noninvolutive_at, min_noninvolutive_order, noninvolutive_at, stiefel_search, validate_null_subspace, MinOrder,
    SearchOptions,
};

use serde::Serialize;
use serde_json::{json, Value};

use crate::calc::Rational;
use crate::structures::StructureError;

/// Label attached to every report: verdicts rest on the subspace criterion.
pub const CRITERION: &str = "pointwise-B reduction";
pub const INVOLUTIVE_THRESHOLD: f64 = 1e-10;
pub const NONINVOLUTIVE_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InvolutivityError {
    #[error("h = {h} outside 2..={k}")]
    HOutOfRange { h: usize, k: usize },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

impl From<crate::calc::CalcError> for InvolutivityError {
    fn from(e: crate::calc::CalcError) -> Self {
        InvolutivityError::Structure(e.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    NonInvolutive,
    InvolutiveAtX,
    Undecided,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::NonInvolutive => "non-involutive",
            Verdict::InvolutiveAtX => "involutive-at-x",
            Verdict::Undecided => "undecided",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// `[X_a, X_b](x) ∉ V(x)`, detected by a covector vanishing on `V(x)`.
    Pair {
        a: usize,
        b: usize,
        covector: Vec<Rational>,
        pairing: Rational,
    },
    /// Orthonormal basis (frame coordinates) of a candidate null subspace.
    Subspace {
        basis: Vec<Vec<f64>>,
        exact_basis: Option<Vec<Vec<Rational>>>,
    },
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SearchDiagnostics {
    pub restarts: usize,
    pub seed: u64,
    pub restart_residuals: Vec<f64>,
    pub min_residual: f64,
    pub best_restart: Option<usize>,
    pub oracle: Option<GridOracleResult>,
    pub kernel_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvolutivityReport {
    pub verdict: Verdict,
    pub h: Option<usize>,
    pub witness: Option<Witness>,
    pub residual: f64,
    pub exact: bool,
    pub method: &'static str,
    pub diagnostics: SearchDiagnostics,
}

fn rats(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(|r| Value::String(r.to_string())).collect())
}

impl InvolutivityReport {
    /// Whether the report asserts h-non-involutivity (or non-involutivity).
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::NonInvolutive
    }

    pub fn to_json(&self) -> Value {
        let witness = match &self.witness {
            None => Value::Null,
            Some(Witness::Pair { a, b, covector, pairing }) => json!({
                "kind": "pair",
                "pair": [a + 1, b + 1],
                "covector": rats(covector),
                "pairing": pairing.to_string(),
            }),
            Some(Witness::Subspace { basis, exact_basis }) => json!({
                "kind": "subspace",
                "basis": basis,
                "exact_basis": exact_basis.as_ref().map(|b| b.iter().map(|v| rats(v)).collect::<Vec<_>>()),
            }),
        };
        let d = &self.diagnostics;
        json!({
            "verdict": self.verdict.as_str(),
            "h": self.h,
            "criterion": CRITERION,
            "exact": self.exact,
            "method": self.method,
            "residual": self.residual,
            "witness": witness,
            "thresholds": {"involutive": INVOLUTIVE_THRESHOLD, "non_involutive": NONINVOLUTIVE_THRESHOLD},
            "diagnostics": {
                "restarts": d.restarts,
                "seed": d.seed,
                "min_residual": d.min_residual,
                "best_restart": d.best_restart,
                "restart_residuals": d.restart_residuals,
                "kernel_dim": d.kernel_dim,
                "oracle": d.oracle.as_ref().map(|o| json!({
                    "verdict": o.verdict.as_str(),
                    "min_residual": o.min_residual,
                    "evaluations": o.evaluations,
                })),
            },
        })
    }
}
