//! Numerical core for the Cauchy problem
//! `u_tt + (-Δ)^sigma u + (-Δ)^theta u_t = f`, `u(0) = 0`, `u_t(0) = u_1`.
//!
//! Everything here is `no_std` with `alloc`: exponent calculus, the Fourier
//! symbols and their propagator, cutoffs, quadrature, exponential-integrator
//! weights, rate fitting and an independent ODE reference integrator.
#![no_std]

extern crate alloc;

pub mod duhamel;
pub mod error;
pub mod exponents;
pub mod fit;
pub mod oracle;
pub mod quadrature;
pub mod radial;
pub mod symbol;

pub use error::{CoreError, Result};
