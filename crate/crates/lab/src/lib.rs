//! Numerical laboratory for `u_tt + (-Δ)^sigma u + (-Δ)^theta u_t = f`:
//! spectral fields, linear decay experiments, a semilinear exponential
//! integrator with blow-up detection, configuration and file formats.

pub mod cli;
pub mod config;
pub mod error;
pub mod field;
pub mod linear;
pub mod output;
pub mod selftest;
pub mod semilinear;

pub use error::{LabError, Result};
