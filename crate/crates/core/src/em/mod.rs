//! Expectation-Maximization: initialization, M-steps and the fit loop.

mod config;
mod fit;
mod init;
mod mstep;

pub use config::{
    Estimator, FitConfig, InitStrategy, MapPrior, StoppingRule, AUTO_FLOOR_FRACTION, DEFAULT_EPS_TAU,
    DEFAULT_MAX_ITERS,
};
pub use fit::{e_step, fit, predict_labels, FitResult, TraceRecord};
pub use init::{initialize, kmeans, kmeans_pp_seeds};
pub use mstep::{
    component_stats, m_step, m_step_map, m_step_ml, pooled_prior_s0, raw_moment_covariance, ComponentStats,
};
