//! Mixture data types and exact probability computations.

mod covariance;
mod dataset;
mod density;
mod params;

pub use covariance::{Covariance, CovarianceKind, CovarianceShape};
pub use dataset::Dataset;
pub use density::{
    gaussian_log_pdf, log_likelihood, log_mixture_densities, log_sum_exp, log_weighted_densities,
    mean_probability, responsibilities, responsibilities_from_log, softmax, Responsibilities,
};
pub(crate) use density::argmax_first;
pub use params::{GmmParams, SIMPLEX_TOL};
