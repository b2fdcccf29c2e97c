//! Reference integrator for the per-frequency system `y'' + b y' + a y = 0`.
//!
//! Uses the three-stage Radau IIA collocation method (order 5, L-stable) with
//! step-doubling error control. It never evaluates the closed-form symbols, so
//! it can serve as an independent check of them.

use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::symbol::Propagator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { rtol: 1e-13, atol: 1e-300, max_steps: 5_000_000 }
    }
}

const SQ6: f64 = 2.449_489_742_783_178;

fn radau_matrix() -> [[f64; 3]; 3] {
    [
        [(88.0 - 7.0 * SQ6) / 360.0, (296.0 - 169.0 * SQ6) / 1800.0, (-2.0 + 3.0 * SQ6) / 225.0],
        [(296.0 + 169.0 * SQ6) / 1800.0, (88.0 + 7.0 * SQ6) / 360.0, (-2.0 - 3.0 * SQ6) / 225.0],
        [(16.0 - SQ6) / 36.0, (16.0 + SQ6) / 36.0, 1.0 / 9.0],
    ]
}

/// Dense LU with partial pivoting on a 6x6 system, solving in place for two right-hand sides.
fn solve6(mut m: [[f64; 6]; 6], rhs: &mut [[f64; 6]; 2]) -> Result<()> {
    for col in 0..6 {
        let piv = (col..6)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[piv][col] == 0.0 {
            return Err(CoreError::Domain("singular stage system"));
        }
        m.swap(col, piv);
        for r in rhs.iter_mut() {
            r.swap(col, piv);
        }
        for row in col + 1..6 {
            let f = m[row][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..6 {
                m[row][k] -= f * m[col][k];
            }
            for r in rhs.iter_mut() {
                r[row] -= f * r[col];
            }
        }
    }
    for r in rhs.iter_mut() {
        for row in (0..6).rev() {
            let mut acc = r[row];
            for k in row + 1..6 {
                acc -= m[row][k] * r[k];
            }
            r[row] = acc / m[row][row];
        }
    }
    Ok(())
}

/// State: two columns `(y, y')`, one per unit initial condition.
type State = [[f64; 2]; 2];

fn radau_step(a: f64, b: f64, y: &State, h: f64) -> Result<State> {
    let coef = radau_matrix();
    let sys = [[0.0, 1.0], [-a, -b]];
    let mut m = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            for r in 0..2 {
                for c in 0..2 {
                    let id = if i == j && r == c { 1.0 } else { 0.0 };
                    m[2 * i + r][2 * j + c] = id - h * coef[i][j] * sys[r][c];
                }
            }
        }
    }
    let mut rhs = [[0.0; 6]; 2];
    for (col, r) in rhs.iter_mut().enumerate() {
        let ay = [y[col][1], -a * y[col][0] - b * y[col][1]];
        for i in 0..3 {
            r[2 * i] = ay[0];
            r[2 * i + 1] = ay[1];
        }
    }
    solve6(m, &mut rhs)?;
    let mut out = *y;
    for col in 0..2 {
        for j in 0..3 {
            out[col][0] += h * coef[2][j] * rhs[col][2 * j];
            out[col][1] += h * coef[2][j] * rhs[col][2 * j + 1];
        }
    }
    Ok(out)
}

fn scaled_error(big: &State, fine: &State, opts: &OracleOptions) -> f64 {
    let mut worst = 0.0f64;
    for col in 0..2 {
        let scale = opts.atol + opts.rtol * fine[col][0].abs().max(fine[col][1].abs());
        for k in 0..2 {
            worst = worst.max((fine[col][k] - big[col][k]).abs() / 31.0 / scale);
        }
    }
    worst
}

/// Propagator of `y'' + b y' + a y = 0` at each of the increasing `times`.
pub fn reference_propagators(a: f64, b: f64, times: &[f64], opts: &OracleOptions) -> Result<Vec<Propagator>> {
    let mut y: State = [[1.0, 0.0], [0.0, 1.0]];
    let mut t = 0.0;
    let rate = libm::sqrt(a) + b;
    let mut h = if rate > 0.0 { 1e-3 / rate } else { 1e-3 };
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < t {
            return Err(CoreError::Domain("times must be increasing"));
        }
        while t < target {
            let step = h.min(target - t);
            let big = radau_step(a, b, &y, step)?;
            let half = radau_step(a, b, &y, 0.5 * step)?;
            let fine = radau_step(a, b, &half, 0.5 * step)?;
            let err = scaled_error(&big, &fine, opts);
            let grow = if err == 0.0 { 5.0 } else { (0.9 * libm::pow(err, -1.0 / 6.0)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                y = fine;
                t = if step == target - t { target } else { t + step };
                if step == h {
                    h *= grow;
                } else {
                    h = h.max(step * grow);
                }
            } else {
                h = step * grow;
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(CoreError::Budget { achieved: err, requested: 1.0 });
            }
        }
        out.push(Propagator { e0: y[0][0], de0: y[0][1], e1: y[1][0], de1: y[1][1] });
    }
    Ok(out)
}

/// Largest relative deviation between two propagators, entrywise, with a denominator floor.
pub fn max_relative_error(got: &Propagator, reference: &Propagator, floor: f64) -> f64 {
    let pairs = [
        (got.e0, reference.e0),
        (got.e1, reference.e1),
        (got.de0, reference.de0),
        (got.de1, reference.de1),
    ];
    pairs
        .iter()
        .map(|(g, r)| (g - r).abs() / r.abs().max(floor))
        .fold(0.0, f64::max)
}
