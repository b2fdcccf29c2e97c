//! Acceptance criteria A1 to A12. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sigma_core::exponents::{alpha0, nbar, EstimateSpec, Lebesgue, ModelParams, Problem};
use sigma_core::fit::{fit_rate, log_times, FitModel};
use sigma_core::oracle::{max_relative_error, reference_propagators, OracleOptions};
use sigma_core::quadrature::QuadOptions;
use sigma_core::radial::RadialProfile;
use sigma_core::symbol::{double_root_radius, k0_of_t, propagator, Coefficients, CutoffConfig, PieceCase, Zone};
use sigma_lab::field::{gaussian_data, Grid};
use sigma_lab::linear::{
    decay_series_grid, decay_series_radial, dyadic_piece_norms, high_freq_decay, convolution_decay_check, split_compare,
    zone_additivity, NormSpec, RadialQuantity,
};
use sigma_lab::selftest::{algebra_defects, condition_disagreements};
use sigma_lab::semilinear::{run, Classification, RunRecord, SemilinearConfig};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn params(sigma: f64, theta: f64, n: u32) -> ModelParams {
    ModelParams::new(sigma, theta, n).unwrap()
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn a1() -> Verdict {
    let start = Instant::now();
    let opts = OracleOptions::default();
    let times = log_times(1e-2, 1e2, 10);
    let mut worst = 0.0f64;
    let mut points = 0;
    for (s, t) in [(2.0, 1.5), (2.0, 2.0), (3.0, 2.0), (0.5, 0.4)] {
        let p = params(s, t, 1);
        let c = double_root_radius(&p).unwrap();
        let mut radii = log_times(1e-2 * c, 10.0 * c, 17);
        radii.extend([0.999 * c, c, 1.001 * c]);
        for rho in radii {
            let coef = Coefficients::at(rho, &p);
            let reference = reference_propagators(coef.a, coef.b, &times, &opts).unwrap();
            for (&t, r) in times.iter().zip(&reference) {
                worst = worst.max(max_relative_error(&propagator(t, rho, &p), r, 1e-280));
                points += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-6 && elapsed < Duration::from_secs(10),
        format!("max relative error {worst:.2e} over {points} points, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn a2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (semigroup, wronskian) = algebra_defects(&mut rng, 1000);
    verdict(
        semigroup <= 1e-8 && wronskian <= 1e-8,
        format!("semigroup defect {semigroup:.2e}, Wronskian defect {wronskian:.2e}"),
    )
}

fn a3() -> Verdict {
    let golden = alpha0(2.0, 3) == 4.0 && alpha0(2.0, 4) == 2.0;
    let nbar_err = (nbar(2.0) - (2.0 + 2.0 * 2f64.sqrt())).abs();
    let bracket = [1.5, 2.0, 3.0, 5.0].iter().all(|&s| {
        let m = nbar(s);
        m > 3.0 * s - 2.0 && m < 3.0 * s - 1.0
    });
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let disagreements = condition_disagreements(&mut rng, 1000).unwrap();
    verdict(
        golden && nbar_err <= 1e-10 && bracket && disagreements == 0,
        format!(
            "critical powers {}, nbar(2) error {nbar_err:.1e}, bracket {}, {disagreements} disagreements in 1000",
            if golden { "ok" } else { "wrong" },
            if bracket { "ok" } else { "violated" }
        ),
    )
}

fn radial_series(p: &ModelParams, quantity: RadialQuantity, t0: f64, t1: f64) -> (Vec<f64>, Vec<f64>) {
    let profile = RadialProfile::gaussian(1.0, 1.0).unwrap();
    let cut = CutoffConfig::default_for(p);
    let s = decay_series_radial(&profile, &log_times(t0, t1, 24), quantity, Zone::Full, p, &cut, &QuadOptions::default())
        .unwrap();
    (s.times, s.values)
}

fn slope(times: &[f64], values: &[f64], window: (f64, f64)) -> f64 {
    fit_rate(times, values, window, FitModel::Power).unwrap().slope
}

fn a4() -> Verdict {
    let start = Instant::now();
    let (t, v) = radial_series(&params(2.0, 2.0, 3), RadialQuantity::Energy, 1e2, 1e5);
    let s = slope(&t, &v, (1e2, 1e5));
    let elapsed = start.elapsed();
    verdict(
        within(s, -0.375, 0.05) && elapsed < Duration::from_secs(60),
        format!("energy slope {s:.4} (target -0.375 ± 0.05), {:.1}s", elapsed.as_secs_f64()),
    )
}

fn a5() -> Verdict {
    let l2 = RadialQuantity::Kernel { b: 0.0, ell: 0 };
    let (t3, v3) = radial_series(&params(2.0, 2.0, 3), l2, 1e2, 1e4);
    let s3 = slope(&t3, &v3, (1e2, 1e4));
    let (t4, v4) = radial_series(&params(2.0, 2.0, 4), l2, 1e2, 1e4);
    let scaled: Vec<f64> = t4.iter().zip(&v4).map(|(t, v)| v / (std::f64::consts::E + t).ln()).collect();
    let spread = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let drift = (slope(&t4, &v4, (1e2, 1e3)) - slope(&t4, &v4, (1e3, 1e4))).abs();
    let (t5, v5) = radial_series(&params(2.0, 2.0, 5), l2, 1e2, 1e4);
    let s5 = slope(&t5, &v5, (1e2, 1e4));
    verdict(
        within(s3, 0.25, 0.05) && spread < 2.0 && drift >= 0.01 && within(s5, -0.125, 0.04),
        format!(
            "n=3 slope {s3:.4}; n=4 log-scaled spread {spread:.3}x, decade-slope drift {drift:.3}; n=5 slope {s5:.4}"
        ),
    )
}

fn a6() -> Verdict {
    let start = Instant::now();
    let p = params(1.5, 1.2, 2);
    let grid = Grid::new(2, 512, 400.0).unwrap();
    let data = gaussian_data(grid, 1.0, 2.5).unwrap();
    let cut = CutoffConfig::default_for(&p);
    let series =
        decay_series_grid(&data, &log_times(20.0, 200.0, 12), &NormSpec::plain(Lebesgue::INFINITY), &p, &cut, 0.01)
            .unwrap();
    let valid = series.valid_until.unwrap();
    let s = series.fit((20.0, 200.0), FitModel::Power).unwrap().slope;
    let elapsed = start.elapsed();
    verdict(
        within(s, -1.0 / 3.0, 0.07) && valid >= 200.0 && elapsed < Duration::from_secs(120),
        format!(
            "sup-norm slope {s:.4} on [20, 200] (target -1/3 ± 0.07), validity limit {valid:.0}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn a7() -> Verdict {
    let p = params(2.0, 1.5, 3);
    let cut = CutoffConfig::default_for(&p);
    let profile = RadialProfile::gaussian(1.0, 0.1).unwrap();
    let times: Vec<f64> = (1..=20).map(|i| 0.5 * i as f64).collect();
    let report = high_freq_decay(&profile, &times, &p, &cut, &QuadOptions::default()).unwrap();
    let grid = Grid::new(3, 48, 12.0).unwrap();
    let data = gaussian_data(grid, 1.0, 0.6).unwrap();
    let additivity = zone_additivity(&data, 0.5, &p, &cut).unwrap();
    verdict(
        (0.5..=2.0).contains(&report.ratio) && additivity < 1e-10,
        format!(
            "rate {:.3} vs floor {:.3} (ratio {:.3}), zone additivity error {additivity:.1e}",
            report.rate, report.floor, report.ratio
        ),
    )
}

fn semilinear_base(alpha: f64, epsilon: f64) -> SemilinearConfig {
    let p = params(0.5, 0.4, 1);
    let mut c = SemilinearConfig::new(p, Problem::UPower, alpha, epsilon, Grid::new(1, 1 << 17, 131072.0).unwrap());
    c.data_width = 5.0;
    c.t_end = 200.0;
    c.dt = 0.25;
    c.dt_max = 2.0;
    c
}

/// Largest relative change of any recorded norm between two runs, over shared checkpoints up to `t_max`.
fn norm_change(a: &RunRecord, b: &RunRecord, t_max: f64) -> f64 {
    let mut worst = 0.0f64;
    for x in a.samples.iter().filter(|s| s.t <= t_max) {
        let Some(y) = b.samples.iter().find(|y| y.t == x.t) else { continue };
        let pairs = [
            (x.u_l2, y.u_l2),
            (x.u_linf, y.u_linf),
            (x.u_lpow, y.u_lpow),
            (x.ut_l2, y.ut_l2),
            (x.ut_linf, y.ut_linf),
            (x.ut_lpow, y.ut_lpow),
            (x.frac_l2, y.frac_l2),
            (x.energy, y.energy),
        ];
        for (p, q) in pairs {
            let scale = p.abs().max(q.abs());
            if scale > 0.0 {
                worst = worst.max((p - q).abs() / scale);
            }
        }
    }
    worst
}

struct Refined {
    base: RunRecord,
    dt_change: f64,
    grid_change: f64,
    same_class: bool,
}

fn refine(cfg: &SemilinearConfig, compare_until: impl Fn(&RunRecord) -> f64) -> Refined {
    let base = run(cfg).unwrap();
    let fine_t = run(&cfg.refined_in_time()).unwrap();
    let fine_x = run(&cfg.refined_in_space()).unwrap();
    let until = compare_until(&base);
    Refined {
        dt_change: norm_change(&base, &fine_t, until),
        grid_change: norm_change(&base, &fine_x, until),
        same_class: fine_t.classification == base.classification && fine_x.classification == base.classification,
        base,
    }
}

fn a8() -> Verdict {
    let start = Instant::now();
    let cfg = semilinear_base(3.0, 1e-3);
    let r = refine(&cfg, |_| f64::INFINITY);
    let elapsed = start.elapsed();
    let s = r.base.late_fit.map_or(f64::NAN, |f| f.slope);
    verdict(
        r.base.classification == Classification::Decaying
            && within(s, -1.0, 0.2)
            && r.same_class
            && r.dt_change < 5e-3
            && r.grid_change < 1e-3
            && elapsed < Duration::from_secs(120),
        format!(
            "{}, late sup-norm slope {s:.4} (target -1 ± 0.2), refinements agree: {}, \
             dt-halving change {:.1e}, grid-doubling change {:.1e}, {:.1}s for three runs",
            r.base.classification.as_str(),
            r.same_class,
            r.dt_change,
            r.grid_change,
            elapsed.as_secs_f64()
        ),
    )
}

fn a9() -> Verdict {
    let cfg = semilinear_base(1.5, 0.5);
    // Norm comparisons stop at half the blow-up time; beyond it the profile is no longer resolved.
    let r = refine(&cfg, |rec| 0.5 * rec.t_blowup.unwrap_or(f64::INFINITY));
    let tb = r.base.t_blowup;
    verdict(
        r.base.classification == Classification::BlowUp
            && tb.is_some_and(f64::is_finite)
            && r.same_class
            && r.dt_change < 5e-3
            && r.grid_change < 1e-3,
        format!(
            "{}, t_blowup {:?}, refinements agree: {}, dt-halving change {:.1e}, grid-doubling change {:.1e} before t_blowup/2",
            r.base.classification.as_str(),
            tb,
            r.same_class,
            r.dt_change,
            r.grid_change
        ),
    )
}

fn a10() -> Verdict {
    let p = params(3.0, 2.0, 1);
    let mut c = SemilinearConfig::new(p, Problem::UtPower, 4.0, 1e-3, Grid::new(1, 1 << 14, 4096.0).unwrap());
    c.t_end = 1000.0;
    c.dt_max = 4.0;
    let rec = run(&c).unwrap();
    let times: Vec<f64> = rec.samples.iter().map(|s| s.t).collect();
    let v: Vec<f64> = rec.samples.iter().map(|s| s.ut_lpow).collect();
    let s = slope(&times, &v, (100.0, 1000.0));
    verdict(
        rec.classification == Classification::Decaying && within(s, -4.0 / 15.0, 0.1),
        format!("{}, |u_t|_L5 slope {s:.4} on [100, 1000] (target -4/15 ± 0.1)", rec.classification.as_str()),
    )
}

fn a11() -> Verdict {
    let p = params(2.0, 1.5, 1);
    let cut = CutoffConfig::default_for(&p);
    let t = 1e3;
    let pieces = dyadic_piece_norms(t, 2..=8, &p, &cut).unwrap();
    let live: Vec<_> = pieces.iter().filter(|d| d.case != PieceCase::Zero).collect();
    let spread = |f: &dyn Fn(&sigma_lab::linear::DyadicPiece) -> f64| {
        let v: Vec<f64> = live.iter().map(|d| f(d)).collect();
        v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let symbol_spread = spread(&|d| d.symbol_ratio);
    let kernel_spread = spread(&|d| d.kernel_ratio);
    let exact_zeros = pieces
        .iter()
        .all(|d| (d.case == PieceCase::Zero) == (d.symbol_sup == 0.0 && d.kernel_sup == 0.0));
    verdict(
        !live.is_empty() && symbol_spread <= 4.0 && kernel_spread <= 4.0 && exact_zeros,
        format!(
            "k0 = {}, {} nonzero pieces in [2, 8], symbol ratio spread {symbol_spread:.2}x, kernel ratio spread {kernel_spread:.2}x, zero pattern {}",
            k0_of_t(t, cut.eps0, p.sigma),
            live.len(),
            if exact_zeros { "matches case table" } else { "mismatch" }
        ),
    )
}

fn a12() -> Verdict {
    let conv = convolution_decay_check(0.5, 2.0, &log_times(1.0, 1e4, 20)).unwrap();
    let p = params(2.0, 2.0, 3);
    let cut = CutoffConfig::default_for(&p);
    // The low-frequency part turns from growth to decay near t = 100 for this data; the box
    // keeps the dispersive tail from wrapping around up to a few thousand.
    let grid = Grid::new(3, 128, 1024.0).unwrap();
    let data = gaussian_data(grid, 1.0, 8.0).unwrap();
    let spec = EstimateSpec::plain(Lebesgue::ONE, Lebesgue::INFINITY);
    let cmp = split_compare(&data, &log_times(100.0, 3000.0, 12), &spec, &p, &cut, 0.01).unwrap();
    let measured = cmp.measured_fit.map_or(f64::NAN, |f| f.slope);
    verdict(
        conv.sup_ratio.is_finite()
            && cmp.split_tighter
            && cmp.below_envelope
            && measured <= cmp.split_exponent + 0.1,
        format!(
            "convolution sup ratio {:.3}; split exponent {} vs unsplit {}, measured low-zone sup slope {:.3} on [100, 3000], below envelope {}",
            conv.sup_ratio,
            cmp.split_exponent,
            cmp.unsplit_exponent,
            measured,
            cmp.below_envelope
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("A1 symbol oracle", a1),
        ("A2 propagator algebra", a2),
        ("A3 exponent golden values", a3),
        ("A4 energy decay", a4),
        ("A5 L2 three branches", a5),
        ("A6 grid sup-norm decay", a6),
        ("A7 high-frequency zone", a7),
        ("A8 supercritical run", a8),
        ("A9 subcritical blow-up", a9),
        ("A10 derivative-power run", a10),
        ("A11 dyadic pieces", a11),
        ("A12 convolution and split envelope", a12),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.starts_with(f.as_str())) {
            continue;
        }
        let v = check();
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
