//! Error-contract emulation of the quantum subroutines.
//!
//! Nothing here simulates a quantum state. Each routine computes the exact
//! classical quantity and then draws an estimate from the measurement
//! statistics the corresponding quantum procedure would produce (sampling
//! frequencies for tomography, the phase-estimation outcome law for
//! amplitude estimation). Failure events are therefore sampled, not assumed
//! away, and the `failed` flag records whether a draw broke its contract.

mod amplitude;
mod claims;
mod forms;
mod tomography;

use serde::Serialize;

pub use amplitude::{
    amplitude_bound, amplitude_estimate, grid_size_for, median_boost, AmplitudeEstimator, DEFAULT_MEDIAN_RUNS,
};
pub use claims::{compose_error_claims, vector_estimate, ClaimsReport};
pub use forms::{
    bilinear_form_estimate, gaussian_exponent_estimate, quadratic_form_estimate, responsibility_estimate,
};
pub use tomography::{
    linf_sample_count, l2_sample_count, tomography_l2, tomography_l2_with, tomography_linf, tomography_linf_with,
    DEFAULT_TOMOGRAPHY_C,
};

/// A randomized estimate together with the contract it was drawn under.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmulatedEstimate<T> {
    pub value: T,
    pub error_budget: f64,
    pub samples_used: u64,
    /// The draw landed outside `error_budget`. Only the emulator can know
    /// this, because it holds the exact value.
    pub failed: bool,
}
