//! Fast randomized checks of the symbol, the propagator algebra and the
//! exponent calculus, driven by a seeded generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sigma_core::exponents::{pair_condition, pair_condition_by_region, nbar, EstimateSpec, Lebesgue, ModelParams, Problem};
use sigma_core::oracle::{max_relative_error, reference_propagators, OracleOptions};
use sigma_core::symbol::{double_root_radius, propagator, CutoffConfig};

use crate::error::Result;
use crate::field::{gaussian_data, Grid};
use crate::linear::{solve_linear, NormSpec};
use crate::semilinear::{run, SemilinearConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, measured: f64, tolerance: f64) -> Check {
        Check { name: name.into(), measured, tolerance, pass: measured <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Parameter sets spanning plate-like, strongly damped and fractional cases.
pub fn reference_params() -> Vec<ModelParams> {
    [(2.0, 1.5), (2.0, 2.0), (3.0, 2.0), (0.5, 0.4)]
        .into_iter()
        .map(|(s, t)| ModelParams { sigma: s, theta: t, n: 1 })
        .collect()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn pivot(p: &ModelParams) -> f64 {
    double_root_radius(p).unwrap_or(1.0)
}

/// Closed-form propagator against an adaptive ODE integration.
pub fn oracle_error(rng: &mut ChaCha8Rng, points: usize) -> Result<f64> {
    let opts = OracleOptions::default();
    let mut worst = 0.0f64;
    for p in reference_params() {
        let c = pivot(&p);
        for _ in 0..points {
            let rho = log_uniform(rng, 1e-2 * c, 10.0 * c);
            let t = log_uniform(rng, 1e-2, 1e2);
            let coef = sigma_core::symbol::Coefficients::at(rho, &p);
            let reference = reference_propagators(coef.a, coef.b, &[t], &opts)?;
            worst = worst.max(max_relative_error(&propagator(t, rho, &p), &reference[0], 1e-280));
        }
    }
    Ok(worst)
}

/// Worst semigroup and Wronskian defects, relative to the entry scale.
pub fn algebra_defects(rng: &mut ChaCha8Rng, points: usize) -> (f64, f64) {
    let (mut semigroup, mut wronskian) = (0.0f64, 0.0f64);
    let params = reference_params();
    for i in 0..points {
        let p = &params[i % params.len()];
        let c = pivot(p);
        let rho = log_uniform(rng, 1e-2 * c, 10.0 * c);
        let t = log_uniform(rng, 1e-2, 50.0);
        let s = log_uniform(rng, 1e-2, 50.0);
        let whole = propagator(t + s, rho, p);
        let split = propagator(t, rho, p).compose(&propagator(s, rho, p));
        let entries = |m: &sigma_core::symbol::Propagator| [m.e0, m.e1, m.de0, m.de1];
        let scale = entries(&whole).iter().chain(&entries(&split)).fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
        for (a, b) in entries(&whole).iter().zip(&entries(&split)) {
            semigroup = semigroup.max((a - b).abs() / scale);
        }
        wronskian = wronskian.max(wronskian_defect(&propagator(t, rho, p), t * rho.powf(2.0 * p.theta)));
    }
    (semigroup, wronskian)
}

/// `|det M - e^{-damping}|` relative to the products forming the determinant,
/// which dominate `e^{-damping}` once cancellation sets in.
pub fn wronskian_defect(m: &sigma_core::symbol::Propagator, damping: f64) -> f64 {
    let expect = (-damping).exp();
    let scale = (m.e0 * m.de1).abs().max((m.e1 * m.de0).abs()).max(expect);
    if scale == 0.0 {
        0.0
    } else {
        (m.det() - expect).abs() / scale
    }
}

/// Disagreements between the admissibility value and its region-by-region form.
pub fn condition_disagreements(rng: &mut ChaCha8Rng, points: usize) -> Result<usize> {
    let mut bad = 0;
    for _ in 0..points {
        let params = ModelParams {
            sigma: rng.gen_range(0.2..5.0),
            theta: 1.0,
            n: rng.gen_range(1..=6),
        };
        let params = ModelParams { theta: params.sigma * rng.gen_range(0.51..1.0), ..params };
        let inv_p: f64 = rng.gen_range(0.5..=1.0);
        let inv_q: f64 = rng.gen_range(0.0..=inv_p);
        let spec = EstimateSpec::plain(Lebesgue::from_reciprocal(inv_p)?, Lebesgue::from_reciprocal(inv_q)?);
        if pair_condition(&spec, &params)?.tag != pair_condition_by_region(&spec, &params)? {
            bad += 1;
        }
    }
    Ok(bad)
}

/// Largest distance of the critical dimension outside `(3σ-2, 3σ-1)`; zero when inside.
pub fn nbar_bracket_excess() -> f64 {
    [1.5, 2.0, 3.0, 5.0]
        .into_iter()
        .map(|s| {
            let v = nbar(s);
            ((3.0 * s - 2.0) - v).max(v - (3.0 * s - 1.0)).max(0.0)
        })
        .fold(0.0, f64::max)
}

/// Relative `L²` gap between a negligible-forcing semilinear run and the linear solution.
pub fn linear_exactness() -> Result<f64> {
    let params = ModelParams { sigma: 2.0, theta: 1.5, n: 1 };
    let grid = Grid::new(1, 256, 64.0)?;
    let mut cfg = SemilinearConfig::new(params, Problem::UPower, 3.0, 1e-6, grid);
    cfg.t_end = 4.0;
    cfg.strict_hypotheses = false;
    let rec = run(&cfg)?;
    let data = gaussian_data(grid, cfg.epsilon, cfg.data_width)?;
    let cutoffs = CutoffConfig::default_for(&params);
    let mut worst = 0.0f64;
    for s in &rec.samples {
        let lin = solve_linear(&data, s.t, &NormSpec::plain(Lebesgue::TWO), &params, &cutoffs)?.l2_spectral();
        worst = worst.max((s.u_l2 - lin).abs() / lin);
    }
    Ok(worst)
}

pub fn run_selftest(seed: u64, samples: usize) -> Result<SelftestReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let oracle_points = (samples / 20).clamp(1, 50);
    let (semigroup, wronskian) = algebra_defects(&mut rng, samples);
    let checks = vec![
        Check::at_most("symbol vs ODE oracle, max relative error", oracle_error(&mut rng, oracle_points)?, 1e-6),
        Check::at_most("semigroup identity, max defect", semigroup, 1e-8),
        Check::at_most("Wronskian, max relative defect", wronskian, 1e-8),
        Check::at_most(
            "admissibility vs region form, disagreements",
            condition_disagreements(&mut rng, samples)? as f64,
            0.0,
        ),
        Check::at_most("critical dimension bracket, excess", nbar_bracket_excess(), 0.0),
        Check::at_most("integrator linear exactness, relative L2 gap", linear_exactness()?, 1e-9),
    ];
    Ok(SelftestReport { seed, samples, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes_and_is_reproducible() {
        let a = run_selftest(7, 200).unwrap();
        assert!(a.passed(), "{:#?}", a.checks);
        let b = run_selftest(7, 200).unwrap();
        assert_eq!(a, b);
    }
}
