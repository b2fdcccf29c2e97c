use sigma_core::exponents::{predict_low_rate, EstimateSpec, Lebesgue, ModelParams, Problem};
use sigma_core::fit::{fit_rate, log_times, FitModel};
use sigma_core::quadrature::QuadOptions;
use sigma_core::radial::RadialProfile;
use sigma_core::symbol::{CutoffConfig, PieceCase, Zone};
use sigma_lab::field::Grid;
use sigma_lab::linear::{decay_series_radial, dyadic_piece_norms, RadialQuantity};
use sigma_lab::semilinear::{run, sweep, Classification, SemilinearConfig};

fn params(sigma: f64, theta: f64, n: u32) -> ModelParams {
    ModelParams::new(sigma, theta, n).unwrap()
}

fn energy_prediction(p: &ModelParams) -> f64 {
    [(p.sigma, 0), (0.0, 1)]
        .into_iter()
        .map(|(b, ell)| {
            let spec = EstimateSpec::new(Lebesgue::ONE, Lebesgue::TWO, 0, b, ell).unwrap();
            predict_low_rate(&spec, p).unwrap().exponent
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn energy_slope_matches_prediction() {
    let profile = RadialProfile::gaussian(1.0, 1.0).unwrap();
    for p in [params(2.0, 2.0, 3), params(2.0, 1.5, 3), params(3.0, 2.0, 4)] {
        let cut = CutoffConfig::default_for(&p);
        let times = log_times(1e2, 1e4, 16);
        let s = decay_series_radial(&profile, &times, RadialQuantity::Energy, Zone::Full, &p, &cut, &QuadOptions::default())
            .unwrap();
        let fit = fit_rate(&s.times, &s.values, (1e2, 1e4), FitModel::Power).unwrap();
        let predicted = energy_prediction(&p);
        assert!((fit.slope - predicted).abs() <= 0.05, "{p:?}: slope {} vs {predicted}", fit.slope);
    }
}

#[test]
fn dyadic_ratios_flatten_at_late_time() {
    // At t = 1e7 several pieces sit well inside the low zone, away from the cutoff transition.
    let p = params(2.0, 1.5, 1);
    let cut = CutoffConfig::default_for(&p);
    let pieces = dyadic_piece_norms(1e7, 2..=8, &p, &cut).unwrap();
    let live: Vec<_> = pieces.iter().filter(|d| d.case != PieceCase::Zero).collect();
    assert!(live.len() >= 3, "{pieces:?}");
    let symbol: Vec<f64> = live.iter().map(|d| d.symbol_ratio).collect();
    let kernel: Vec<f64> = live.iter().map(|d| d.kernel_ratio).collect();
    for v in [symbol, kernel] {
        let spread = v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread <= 2.0, "{v:?}");
    }
    for d in &pieces {
        assert_eq!(d.case == PieceCase::Zero, d.symbol_sup == 0.0 && d.kernel_sup == 0.0, "{d:?}");
    }
}

fn small_1d(alpha: f64, epsilon: f64) -> SemilinearConfig {
    let mut c = SemilinearConfig::new(params(0.5, 0.4, 1), Problem::UPower, alpha, epsilon, Grid::new(1, 4096, 4096.0).unwrap());
    c.data_width = 5.0;
    c.t_end = 50.0;
    c.dt = 0.25;
    c.dt_max = 2.0;
    c
}

#[test]
fn tighter_tolerance_leaves_run_unchanged() {
    for (alpha, eps) in [(3.0, 1e-3), (1.5, 0.5)] {
        let base = small_1d(alpha, eps);
        let tight = SemilinearConfig { rtol: base.rtol / 100.0, atol: base.atol / 100.0, ..base.clone() };
        let a = run(&base).unwrap();
        let b = run(&tight).unwrap();
        assert_eq!(a.classification, b.classification);
        match (a.t_blowup, b.t_blowup) {
            (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-2 * x, "{x} {y}"),
            (None, None) => {
                for (x, y) in a.samples.iter().zip(&b.samples) {
                    assert_eq!(x.t, y.t);
                    assert!((x.u_l2 - y.u_l2).abs() <= 1e-4 * x.u_l2, "t={}", x.t);
                }
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn larger_data_never_delays_blowup() {
    let base = small_1d(1.5, 0.5);
    let result = sweep(&base, &[1.5, 3.0], &[1e-3, 0.25, 0.5, 1.0], 1).unwrap();
    for alpha in [1.5, 3.0] {
        let mut rows: Vec<_> = result.rows.iter().filter(|r| r.alpha == alpha).collect();
        rows.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        let mut last_blowup = f64::INFINITY;
        let mut seen_blowup = false;
        for r in rows {
            if seen_blowup {
                assert_eq!(r.classification, Classification::BlowUp, "alpha {alpha} eps {}", r.epsilon);
            }
            if let Some(tb) = r.t_blowup {
                assert!(tb <= last_blowup * (1.0 + 1e-3), "alpha {alpha} eps {}", r.epsilon);
                last_blowup = tb;
                seen_blowup = true;
            }
        }
    }
    let small = result.rows.iter().find(|r| r.alpha == 3.0 && r.epsilon == 1e-3).unwrap();
    // The short horizon leaves the slope pre-asymptotic, so only global existence is checked.
    assert!(matches!(small.classification, Classification::Decaying | Classification::Bounded), "{small:?}");
}
