//! Per-frequency weights of a second-order exponential integrator.
//!
//! Over one step of length `h` the state `(û, û_t)` is propagated exactly and the
//! forcing is interpolated linearly between its values at both ends:
//!
//! `û(t+h)   = e0 û + e1 û_t + u_start f(t) + u_end f(t+h)`
//! `û_t(t+h) = de0 û + de1 û_t + v_start f(t) + v_end f(t+h)`
//!
//! with `u_start = ∫_0^h K̂(τ) τ/h dτ`, `u_end = ∫_0^h K̂(τ) (1-τ/h) dτ` and the
//! `v` weights using `∂_t K̂` instead.

use num_complex::Complex64;

use crate::symbol::{Coefficients, Propagator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepWeights {
    pub prop: Propagator,
    pub u_start: f64,
    pub u_end: f64,
    pub v_start: f64,
    pub v_end: f64,
}

impl StepWeights {
    /// Advances one mode given the forcing at both ends of the step.
    pub fn advance<T>(&self, u: T, v: T, f_start: T, f_end: T) -> (T, T)
    where
        T: Copy + core::ops::Mul<f64, Output = T> + core::ops::Add<Output = T>,
    {
        (
            u * self.prop.e0 + v * self.prop.e1 + f_start * self.u_start + f_end * self.u_end,
            u * self.prop.de0 + v * self.prop.de1 + f_start * self.v_start + f_end * self.v_end,
        )
    }
}

/// Weights for one mode with coefficients `c` and step `h > 0`.
pub fn step_weights(c: &Coefficients, h: f64) -> StepWeights {
    let prop = c.propagator(h);
    let (a, b, d) = (c.a, c.b, c.d);
    let half_bh = 0.5 * b * h;
    let root_span = libm::sqrt(d.abs()) * h;
    let largest = if d < 0.0 { libm::sqrt(a) * h } else { half_bh + root_span };
    let (u_start, u_end, v_start, v_end) = if largest <= 2.0 {
        taylor_weights(a, b, h)
    } else if 2.0 * root_span >= 0.5 {
        divided_difference_weights(a, b, d, h)
    } else {
        near_double_root_weights(half_bh, d * h * h, h)
    };
    StepWeights { prop, u_start, u_end, v_start, v_end }
}

/// Forced solutions of `y'' + b y' + a y = g` with zero data, by Taylor series.
fn taylor_weights(a: f64, b: f64, h: f64) -> (f64, f64, f64, f64) {
    let big_a = a * h * h;
    let big_b = b * h;
    let solve = |g0: f64, g1: f64| {
        // Coefficients d_k of y in the scaled variable s/h.
        let (mut d0, mut d1) = (0.0f64, 0.0f64);
        let (mut val, mut slope) = (0.0, 0.0);
        for k in 0..60 {
            let g = match k {
                0 => g0,
                1 => g1,
                _ => 0.0,
            };
            let kf = k as f64;
            let d2 = (h * h * g - big_b * (kf + 1.0) * d1 - big_a * d0) / ((kf + 2.0) * (kf + 1.0));
            val += d2;
            slope += (kf + 2.0) * d2;
            if k > 4 && d2.abs() <= 1e-18 * val.abs() && d1.abs() <= 1e-18 * val.abs() {
                break;
            }
            d0 = d1;
            d1 = d2;
        }
        (val, slope / h)
    };
    let (us, vs) = solve(1.0, -1.0);
    let (ue, ve) = solve(0.0, 1.0);
    (us, ue, vs, ve)
}

/// `∫_0^1 u e^{zu} du` and `∫_0^1 (1-u) e^{zu} du`.
fn phi_pair(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 1.0 {
        let mut f1 = Complex64::new(0.0, 0.0);
        let mut g = Complex64::new(0.0, 0.0);
        let mut power = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for k in 0..30 {
            let kf = k as f64;
            if k > 0 {
                fact *= kf;
            }
            f1 += power / (fact * (kf + 2.0));
            g += power / (fact * (kf + 1.0) * (kf + 2.0));
            power *= z;
        }
        (f1, g)
    } else {
        let ez = z.exp();
        let z2 = z * z;
        ((ez * (z - 1.0) + 1.0) / z2, (ez - 1.0 - z) / z2)
    }
}

fn divided_difference_weights(a: f64, b: f64, d: f64, h: f64) -> (f64, f64, f64, f64) {
    let (l1, l2) = if d < 0.0 {
        let w = libm::sqrt(-d);
        (Complex64::new(-0.5 * b, w), Complex64::new(-0.5 * b, -w))
    } else {
        let fast = -0.5 * b - libm::sqrt(d);
        (Complex64::new(a / fast, 0.0), Complex64::new(fast, 0.0))
    };
    let (z1, z2) = (l1 * h, l2 * h);
    let (f1a, ga) = phi_pair(z1);
    let (f1b, gb) = phi_pair(z2);
    let dz = z1 - z2;
    let h2 = h * h;
    (
        ((f1a - f1b) / dz).re * h2,
        ((ga - gb) / dz).re * h2,
        ((z1 * f1a - z2 * f1b) / dz).re * h,
        ((z1 * ga - z2 * gb) / dz).re * h,
    )
}

/// `E_j(x) = ∫_0^1 u^j e^{-xu} du` for `j = 0..out.len()`.
fn moment_table(x: f64, out: &mut [f64]) {
    let decay = libm::exp(-x);
    if x <= 60.0 {
        for (j, slot) in out.iter_mut().enumerate() {
            let mut term = 1.0 / (j as f64 + 1.0);
            let mut sum = term;
            let mut n = 1.0;
            loop {
                term *= x / (j as f64 + n + 1.0);
                sum += term;
                if n > x && term < 1e-17 * sum {
                    break;
                }
                n += 1.0;
            }
            *slot = decay * sum;
        }
    } else {
        out[0] = -libm::expm1(-x) / x;
        for j in 1..out.len() {
            out[j] = (j as f64 * out[j - 1] - decay) / x;
        }
    }
}

/// Expansion in the squared root gap `dh²` around a double root, for large `bh`.
fn near_double_root_weights(x: f64, gap_sq: f64, h: f64) -> (f64, f64, f64, f64) {
    const TERMS: usize = 12;
    let mut m = [0.0; 2 * TERMS + 3];
    moment_table(x, &mut m);
    let (mut us, mut ue, mut vs, mut ve) = (0.0, 0.0, 0.0, 0.0);
    let mut coef = 1.0;
    for k in 0..TERMS {
        let j = 2 * k;
        let odd = (j + 1) as f64;
        if k > 0 {
            coef *= gap_sq / ((j as f64) * odd);
        }
        us += coef * m[j + 2];
        ue += coef * (m[j + 1] - m[j + 2]);
        vs += coef * (odd * m[j + 1] - x * m[j + 2]);
        ve += coef * (odd * (m[j] - m[j + 1]) - x * (m[j + 1] - m[j + 2]));
    }
    (us * h * h, ue * h * h, vs * h, ve * h)
}
