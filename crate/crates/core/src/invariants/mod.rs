//! Invariants of finite mm-spaces: Prokhorov and Ky Fan distances, partial
//! and observable diameters, concentration, Lévy mean, box-distance bounds.

mod box_bounds;
mod flow;
mod functional;
mod observable;
mod partial_diameter;
mod prokhorov;

use serde::Serialize;
use thiserror::Error;

use crate::mm::MmError;

pub use box_bounds::{
    box_lb_partial_diam, box_ub, verify_eps_mm_isom, BoxBound, BoxWitness, EpsBreakdown,
    EpsMmIsomCert,
};
pub use flow::FlowNetwork;
pub use functional::{ky_fan, levy_mean, median_interval};
pub use observable::{
    ball_halfmass_set, concentration_function_lb, observable_diameter_lb,
    observable_diameter_lb_values, sublevel_halfmass_set, LipschitzFamily,
};
pub use partial_diameter::{
    line_embedding, partial_diameter, partial_diameter_1d, partial_diameter_exhaustive,
    partial_diameter_sorted_uniform, PartialDiameter, EXACT_CUTOFF, PARTIAL_MASS_TOL,
};
pub use prokhorov::{prokhorov, prokhorov_bipartite};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantError {
    #[error("expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("measure has no mass")]
    EmptyMeasure,
    #[error("mass level {0} is outside (0, 1]")]
    AlphaOutOfRange(f64),
    #[error("level {0} is outside (0, 1)")]
    KappaOutOfRange(f64),
    #[error("function family is empty")]
    EmptyFamily,
    #[error("family member {member} is not 1-Lipschitz on the pair ({i}, {j})")]
    NotLipschitz { member: usize, i: usize, j: usize },
    #[error("set {index} has mass {mass} < 1/2")]
    SetMassBelowHalf { index: usize, mass: f64 },
    #[error("no certificate or common metric supplied")]
    NoCertificateApplicable,
    #[error(transparent)]
    Mm(#[from] MmError),
}

/// Whether a reported number is the invariant itself or a one-sided bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    LowerBound,
    UpperBound,
}

/// One line of an invariant report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantRow {
    pub invariant: String,
    pub params: serde_json::Value,
    pub value: f64,
    pub mode: Mode,
}

impl InvariantRow {
    pub fn new(invariant: &str, params: serde_json::Value, value: f64, mode: Mode) -> Self {
        InvariantRow {
            invariant: invariant.to_owned(),
            params,
            value,
            mode,
        }
    }
}
