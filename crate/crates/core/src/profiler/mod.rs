//! Measurement of the parameters that enter the runtime formulas: condition
//! numbers, the `μ` matrix parameter, `η` and log-determinants.

mod logdet;
mod matrix;
mod report;

pub use logdet::{logdet_chebyshev, logdet_chebyshev_with, logdet_exact, LogDetConfig, LogDetEstimate};
pub use matrix::{condition_number, mu_param, mu_param_rows, mu_v_prime, singular_values, v_prime, MU_P_SET};
pub use report::{eta, profile, KappaPair, ProfileOptions, ProfileReport, DEFAULT_V_PRIME_BUDGET};
