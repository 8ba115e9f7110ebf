//! Numerical laboratory for the Lotka–Volterra competition–diffusion system
//! with two free boundaries governed by Stefan conditions.
//!
//! * [`semiwave`] computes semi-wave speeds `c(mu, a, b, d)` by shooting.
//! * [`fbsolver`] time-steps the coupled (or single-species) free-boundary
//!   problem on front-fixed grids.
//! * [`analysis`] evaluates closed-form thresholds and certificates and
//!   classifies trajectories into spreading or vanishing.
//! * [`verify`] bundles the acceptance criteria used by `twofront verify`.

// `!(x > 0.0)` style guards are deliberate: NaN has to fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod fbsolver;
pub mod ode;
mod params;
pub mod presets;
pub mod semiwave;
pub mod verify;

use thiserror::Error;

pub use analysis::{
    classify, coexistence_limits, dichotomy_consistency, eigen_length, fit_front_speed,
    iteration_bounds, speed_lower_bound_check, thm6_certificate, thm7_delta_max, thresholds,
    AnalysisError, ClassifyCriteria, Label, Outcome, Thresholds,
};
pub use fbsolver::{
    run, solve_single_species, GridSpec, InitialData, SampledProfile, SingleSpeciesSpec,
    SolverError, State, Trajectory,
};
pub use params::Params;
pub use semiwave::{
    competition_speeds, in_region_a, solve_semiwave, SemiWave, SemiWaveParams, SemiwaveError,
};

/// A parameter that failed validation.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid value for `{field}`: {reason}")]
pub struct ParamError {
    pub field: String,
    pub reason: String,
}

impl ParamError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ParamError {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
