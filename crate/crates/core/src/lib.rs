//! Gaussian-mixture EM with a bounded-noise emulation of quantum EM.
//!
//! The emulation never simulates quantum states. Each quantum subroutine is
//! replaced by its exact classical value plus noise drawn so that the
//! subroutine's error contract holds with the stated probability. That makes
//! the error-composition arguments testable at desk scale.

pub mod cost;
pub mod em;
pub mod emulator;
pub mod error;
pub mod gmm;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod profiler;
pub mod synth;
pub mod validate;

pub use error::{Error, Result};
