use proptest::prelude::*;
use sigma_core::exponents::{
    alpha0, alpha1, pair_condition, pair_condition_by_region, nbar, predict_low_rate, Branch, EstimateSpec, Lebesgue, ModelParams,
};
use sigma_core::symbol::{
    double_root_radius, khat, lambda_pm, khat_sinc, khat_two_exponential, propagator, psi_k, Coefficients,
};

fn noneffective() -> impl Strategy<Value = ModelParams> {
    (0.3f64..5.0, 0.51f64..1.0, 1u32..=6)
        .prop_map(|(sigma, frac, n)| ModelParams { sigma, theta: sigma * frac, n })
}

fn log_range(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn pivot(p: &ModelParams) -> f64 {
    double_root_radius(p).unwrap_or(1.0).min(1e3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn semigroup_identity(p in noneffective(), r in log_range(1e-2, 10.0), t in log_range(1e-2, 50.0), s in log_range(1e-2, 50.0)) {
        let rho = r * pivot(&p);
        let whole = propagator(t + s, rho, &p);
        let split = propagator(t, rho, &p).compose(&propagator(s, rho, &p));
        let a = [whole.e0, whole.e1, whole.de0, whole.de1];
        let b = [split.e0, split.e1, split.de0, split.de1];
        let scale = a.iter().chain(&b).fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-8 * scale, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn wronskian(p in noneffective(), r in log_range(1e-2, 10.0), t in log_range(1e-2, 50.0)) {
        let rho = r * pivot(&p);
        let m = propagator(t, rho, &p);
        let expect = (-t * rho.powf(2.0 * p.theta)).exp();
        // The determinant is a difference of products that can dwarf e^{-t b}.
        let scale = (m.e0 * m.de1).abs().max((m.e1 * m.de0).abs()).max(expect);
        prop_assert!((m.det() - expect).abs() <= 1e-8 * scale, "{} vs {}", m.det(), expect);
    }

    #[test]
    fn kernel_bounded_by_time(p in noneffective(), r in log_range(1e-3, 1e2), t in log_range(1e-3, 1e3)) {
        let rho = r * pivot(&p);
        prop_assert!(khat(t, rho, &p).abs() <= t * (1.0 + 1e-12));
    }

    #[test]
    fn kernel_solves_its_ode(p in noneffective(), r in log_range(1e-2, 4.0), t in log_range(0.1, 20.0)) {
        let rho = r * pivot(&p);
        let c = Coefficients::at(rho, &p);
        // Step from the fastest mode still alive at time t.
        let (slow, fast) = lambda_pm(rho, &p).unwrap();
        let rate = if fast.re * t < -40.0 { slow.norm() } else { fast.norm().max(slow.norm()) };
        let h = 1e-3 * t.min(1.0 / rate);
        let (km, k0, kp) = (khat(t - h, rho, &p), khat(t, rho, &p), khat(t + h, rho, &p));
        let second = (kp - 2.0 * k0 + km) / (h * h);
        let first = (kp - km) / (2.0 * h);
        let residual = second + c.b * first + c.a * k0;
        let size = second.abs().max((c.b * first).abs()).max((c.a * k0).abs());
        prop_assert!(residual.abs() <= 1e-6 * size.max(1.0), "residual {residual} size {size}");
    }

    #[test]
    fn sinc_and_exponential_forms_agree(p in noneffective(), x in 0.05f64..1.9, t in log_range(1e-2, 1e2)) {
        // x = |ξ|^{2θ-σ} spans the oscillatory side of the double root.
        let rho = x.powf(1.0 / (2.0 * p.theta - p.sigma));
        let a = khat_sinc(t, rho, &p).unwrap();
        let b = khat_two_exponential(t, rho, &p).unwrap();
        let scale = t * (-0.5 * rho.powf(2.0 * p.theta) * t).exp();
        prop_assert!((a - b).abs() <= 1e-10 * scale.max(a.abs()), "{a} {b}");
    }

    #[test]
    fn dyadic_partition(r in log_range(1e-6, 1e6)) {
        let ks: Vec<f64> = (-30..=30).map(|k| psi_k(k, r)).collect();
        let sum: f64 = ks.iter().sum();
        let live = ks.iter().filter(|v| **v != 0.0).count();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(live <= 3);
        prop_assert!(ks.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn condition_region_form(sigma in 0.2f64..6.0, n in 1u32..=8, ip in 0.0f64..=1.0, iq in 0.0f64..=1.0) {
        let (ip, iq) = if iq <= ip { (ip, iq) } else { (iq, ip) };
        let p = ModelParams { sigma, theta: sigma * 0.75, n };
        let spec = EstimateSpec::plain(Lebesgue::from_reciprocal(ip).unwrap(), Lebesgue::from_reciprocal(iq).unwrap());
        prop_assert_eq!(pair_condition(&spec, &p).unwrap().tag, pair_condition_by_region(&spec, &p).unwrap());
    }

    #[test]
    fn critical_powers_satisfy_vieta(sigma in 0.2f64..6.0, n in 1u32..=12) {
        let nf = n as f64;
        if nf > sigma {
            prop_assert!((alpha0(sigma, n) * (nf - sigma) - 2.0 * sigma).abs() < 1e-12 * sigma);
        }
        prop_assert!((alpha1(sigma, n) * nf - sigma).abs() < 1e-12 * sigma);
    }

    #[test]
    fn rate_monotone_in_gap(p in noneffective(), iq in 0.0f64..0.5, d1 in 0.0f64..0.5, d2 in 0.0f64..0.5) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let q = Lebesgue::from_reciprocal(iq).unwrap();
        let a = EstimateSpec::plain(Lebesgue::from_reciprocal(iq + lo).unwrap(), q);
        let b = EstimateSpec::plain(Lebesgue::from_reciprocal(iq + hi).unwrap(), q);
        let (ra, rb) = (predict_low_rate(&a, &p).unwrap(), predict_low_rate(&b, &p).unwrap());
        if ra.theorem == rb.theorem {
            prop_assert!(rb.exponent <= ra.exponent + 1e-12, "{ra:?} {rb:?}");
        }
    }
}

#[test]
fn nbar_roots_and_bracket() {
    for s in [1.25, 1.5, 2.0, 3.0, 5.0, 10.0] {
        let m = nbar(s);
        let residual = m * m - (3.0 * s - 2.0) * m - 2.0 * s;
        assert!(residual.abs() <= 1e-10 * (m * m), "sigma {s}: residual {residual}");
        assert!(m > 3.0 * s - 2.0 && m < 3.0 * s - 1.0, "sigma {s}: {m}");
    }
    assert!((nbar(2.0) - (2.0 + 8f64.sqrt())).abs() < 1e-10);
}

#[test]
fn nbar_excess_decreases() {
    let grid: Vec<f64> = (0..200).map(|i| 1.01 + 0.05 * i as f64).collect();
    let excess: Vec<f64> = grid.iter().map(|&s| nbar(s) - (3.0 * s - 2.0)).collect();
    assert!(excess.windows(2).all(|w| w[1] < w[0]));
    assert!(excess[0] < 1.0 && excess[0] > 0.95);
}

#[test]
fn condition_equality_at_critical_dimension() {
    // Evaluated by hand at the non-integer dimension n̄.
    for s in [1.5, 2.0, 3.0] {
        let n = nbar(s);
        let q = 1.0 + 2.0 * s / (n - s);
        let iq = 1.0 / q;
        let value = n / s * (1.0 - iq) + n * (-0.5f64).max(iq - 0.5);
        assert!((value - 1.0).abs() < 1e-10, "sigma {s}: {value}");
    }
}

#[test]
fn l2_rate_three_branches() {
    for n in 1..=12u32 {
        let p = ModelParams { sigma: 2.0, theta: 2.0, n };
        let spec = EstimateSpec::plain(Lebesgue::ONE, Lebesgue::TWO);
        let r = predict_low_rate(&spec, &p).unwrap();
        let nf = n as f64;
        let (expect, log) = if n < 4 {
            (1.0 - nf / 4.0, false)
        } else if n == 4 {
            (0.0, true)
        } else {
            (-(nf - 4.0) / 8.0, false)
        };
        assert!((r.exponent - expect).abs() < 1e-12, "n {n}: {r:?}");
        assert_eq!(r.log_loss, log, "n {n}");
        assert!(r.covered);
    }
}

#[test]
fn energy_prediction() {
    let p = ModelParams { sigma: 2.0, theta: 2.0, n: 3 };
    let spec = EstimateSpec::new(Lebesgue::ONE, Lebesgue::TWO, 0, 2.0, 0).unwrap();
    let r = predict_low_rate(&spec, &p).unwrap();
    assert!((r.exponent + 0.375).abs() < 1e-12);
    assert_eq!(r.theorem, Branch::DiffusiveNoLog);
}
