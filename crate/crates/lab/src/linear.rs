//! Linear decay experiments: grid and radial norm series, frequency zones,
//! dyadic pieces of the rescaled low-frequency multiplier, split-versus-unsplit
//! envelopes and the singular time convolution.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use sigma_core::exponents::{EstimateSpec, Lebesgue, ModelParams};
use sigma_core::fit::{fit_exponential, fit_rate, FitModel, RateFit};
use sigma_core::quadrature::{singular_convolution, QuadOptions};
use sigma_core::radial::{radial_l2_norm, EnergySymbol, KernelSymbol, RadialProfile};
use sigma_core::symbol::{
    k0_of_t, lambda_pm, piece_case, psi_k, rescaled_multiplier, Coefficients, CutoffConfig, PieceCase,
    Zone,
};

use crate::error::{LabError, Result};
use crate::field::{lp_norm_of, sup_norm, Field, Grid};

/// Which norm of the linear solution `u = K(t) * u_1` is tracked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub q: Lebesgue,
    /// Spatial derivative orders per axis.
    #[serde(default)]
    pub beta: [u32; 3],
    /// Order of `(-Δ)^{b/2}`.
    #[serde(default)]
    pub b: f64,
    /// Number of time derivatives.
    #[serde(default)]
    pub ell: u32,
    #[serde(default = "full_zone")]
    pub zone: Zone,
}

fn full_zone() -> Zone {
    Zone::Full
}

impl NormSpec {
    pub fn plain(q: Lebesgue) -> NormSpec {
        NormSpec { q, beta: [0; 3], b: 0.0, ell: 0, zone: Zone::Full }
    }

    pub fn with_zone(self, zone: Zone) -> NormSpec {
        NormSpec { zone, ..self }
    }

    pub fn name(&self) -> String {
        let target = match self.ell {
            0 => "u".to_string(),
            1 => "u_t".to_string(),
            l => format!("d_t^{l} u"),
        };
        let mut ops = String::new();
        let order: u32 = self.beta.iter().sum();
        if order > 0 {
            ops.push_str(&format!("d_x^{order} "));
        }
        if self.b != 0.0 {
            ops.push_str(&format!("(-lap)^{} ", self.b / 2.0));
        }
        format!("|{ops}{target}|_L{}", self.q)
    }
}

/// Norm samples over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub norm_name: String,
    pub zone: Zone,
    /// Last time at which a periodic box still represents the whole-space solution.
    pub valid_until: Option<f64>,
}

impl DecaySeries {
    pub fn fit(&self, window: (f64, f64), model: FitModel) -> Result<RateFit> {
        let hi = self.valid_until.map_or(window.1, |v| v.min(window.1));
        Ok(fit_rate(&self.times, &self.values, (window.0, hi), model)?)
    }
}

/// `c · (L/2π)^{2θ}`: beyond it the slowest resolved mode has stopped decaying like in `R^n`.
pub fn validity_limit(grid: &Grid, params: &ModelParams, c_valid: f64) -> f64 {
    c_valid * (grid.length / (2.0 * PI)).powf(2.0 * params.theta)
}

/// Symbol `(iξ)^β |ξ|^b ∂_t^ell K̂(t, |ξ|) φ_zone(|ξ|)` on a grid, Nyquist slots of odd orders removed.
fn kernel_symbol<'a>(
    t: f64,
    spec: &'a NormSpec,
    params: &'a ModelParams,
    cutoffs: &'a CutoffConfig,
    nyquist: f64,
) -> impl Fn(&[f64], f64) -> Complex64 + 'a {
    move |xi: &[f64], rho: f64| {
        let w = cutoffs.weight(spec.zone, rho);
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let c = Coefficients::at(rho, params);
        let m = c.propagator(t);
        let (mut k, mut dk) = (m.e1, m.de1);
        for _ in 0..spec.ell {
            let next = -c.b * dk - c.a * k;
            k = dk;
            dk = next;
        }
        let mut z = Complex64::new(w * k, 0.0);
        if spec.b != 0.0 {
            z *= if rho == 0.0 { 0.0 } else { rho.powf(spec.b) };
        }
        for (axis, &order) in spec.beta.iter().enumerate().take(xi.len()) {
            if order == 0 {
                continue;
            }
            if order % 2 == 1 && (xi[axis].abs() - nyquist).abs() < 1e-9 * nyquist {
                return Complex64::new(0.0, 0.0);
            }
            z *= Complex64::new(0.0, xi[axis]).powu(order);
        }
        z
    }
}

/// `∂_x^β (-Δ)^{b/2} ∂_t^ell K(t) * u_1` restricted to a zone.
pub fn solve_linear(
    u1: &Field,
    t: f64,
    spec: &NormSpec,
    params: &ModelParams,
    cutoffs: &CutoffConfig,
) -> Result<Field> {
    if !(t >= 0.0) {
        return Err(LabError::Usage("time must be nonnegative".into()));
    }
    if u1.grid().dim != params.n as usize {
        return Err(LabError::Config(format!(
            "grid dimension {} differs from model dimension {}",
            u1.grid().dim,
            params.n
        )));
    }
    let nyq = u1.grid().nyquist();
    u1.apply_symbol(kernel_symbol(t, spec, params, cutoffs, nyq))
}

/// Grid-path series of `spec` at the given times.
pub fn decay_series_grid(
    u1: &Field,
    times: &[f64],
    spec: &NormSpec,
    params: &ModelParams,
    cutoffs: &CutoffConfig,
    c_valid: f64,
) -> Result<DecaySeries> {
    let grid = *u1.grid();
    let spectrum = u1.spectrum().to_vec();
    let values: Result<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let data = Field::from_spectrum(grid, spectrum.clone())?;
            let sol = solve_linear(&data, t, spec, params, cutoffs)?;
            Ok(if spec.q.is_infinite() {
                sup_norm(sol.values(), &grid)
            } else {
                lp_norm_of(sol.values(), grid.cell_volume(), spec.q)
            })
        })
        .collect();
    Ok(DecaySeries {
        times: times.to_vec(),
        values: values?,
        norm_name: spec.name(),
        zone: spec.zone,
        valid_until: Some(validity_limit(&grid, params, c_valid)),
    })
}

/// Quantities available on the radial path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadialQuantity {
    /// `(‖u_t‖² + ‖(-Δ)^{σ/2} u‖²)^{1/2}`.
    Energy,
    /// `‖(-Δ)^{b/2} ∂_t^ell u‖_{L²}`.
    Kernel { b: f64, ell: u32 },
}

impl RadialQuantity {
    pub fn name(&self) -> String {
        match self {
            RadialQuantity::Energy => "energy |(u_t, (-lap)^(sigma/2) u)|_L2".into(),
            RadialQuantity::Kernel { b, ell } => NormSpec {
                q: Lebesgue::TWO,
                beta: [0; 3],
                b: *b,
                ell: *ell,
                zone: Zone::Full,
            }
            .name(),
        }
    }
}

/// Radial-path `L²` series for radial data.
pub fn decay_series_radial(
    profile: &RadialProfile,
    times: &[f64],
    quantity: RadialQuantity,
    zone: Zone,
    params: &ModelParams,
    cutoffs: &CutoffConfig,
    opts: &QuadOptions,
) -> Result<DecaySeries> {
    let n = params.n;
    let values: Result<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let v = match quantity {
                RadialQuantity::Energy => {
                    let s = EnergySymbol { params: *params, t, zone, cutoffs: *cutoffs };
                    radial_l2_norm(profile, &s, n, opts)?
                }
                RadialQuantity::Kernel { b, ell } => {
                    let s = KernelSymbol { params: *params, t, b, ell, zone, cutoffs: *cutoffs };
                    radial_l2_norm(profile, &s, n, opts)?
                }
            };
            Ok(v)
        })
        .collect();
    Ok(DecaySeries {
        times: times.to_vec(),
        values: values?,
        norm_name: quantity.name(),
        zone,
        valid_until: None,
    })
}

/// `min_{|ξ| >= N∞} |Re λ+(ξ)|`, sampled geometrically out to `10^6 N∞`.
pub fn symbol_floor(params: &ModelParams, cutoffs: &CutoffConfig) -> Result<f64> {
    let mut floor = f64::INFINITY;
    let mut rho = cutoffs.n_inf;
    while rho <= cutoffs.n_inf * 1e6 {
        let (lp, _) = lambda_pm(rho, params)?;
        floor = floor.min(lp.re.abs());
        rho *= 1.005;
    }
    Ok(floor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighFreqReport {
    pub series: DecaySeries,
    /// Fitted rate `c` of `C e^{-c t}`.
    pub rate: f64,
    pub r_squared: f64,
    pub floor: f64,
    pub ratio: f64,
}

/// Exponential decay of the high-frequency part of the solution.
pub fn high_freq_decay(
    profile: &RadialProfile,
    times: &[f64],
    params: &ModelParams,
    cutoffs: &CutoffConfig,
    opts: &QuadOptions,
) -> Result<HighFreqReport> {
    let quantity = RadialQuantity::Kernel { b: 0.0, ell: 0 };
    let series = decay_series_radial(profile, times, quantity, Zone::High, params, cutoffs, opts)?;
    let (rate, r_squared) = fit_exponential(&series.times, &series.values, (0.0, f64::INFINITY))?;
    let floor = symbol_floor(params, cutoffs)?;
    Ok(HighFreqReport { series, rate, r_squared, floor, ratio: rate / floor })
}

/// `max |u_low + u_mid + u_high - u| / max |u|` at one time.
pub fn zone_additivity(u1: &Field, t: f64, params: &ModelParams, cutoffs: &CutoffConfig) -> Result<f64> {
    let base = NormSpec::plain(Lebesgue::INFINITY);
    let full = solve_linear(u1, t, &base, params, cutoffs)?;
    let mut sum = vec![0.0; full.values().len()];
    for zone in [Zone::Low, Zone::Mid, Zone::High] {
        let part = solve_linear(u1, t, &base.with_zone(zone), params, cutoffs)?;
        for (s, v) in sum.iter_mut().zip(part.values()) {
            *s += v;
        }
    }
    let scale = full.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = sum.iter().zip(full.values()).fold(0.0f64, |m, (s, v)| m.max((s - v).abs()));
    Ok(if scale == 0.0 { err } else { err / scale })
}

/// Size of one dyadic piece `ψ_k m(t, ·)` of the rescaled low-frequency multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicPiece {
    pub k: i32,
    pub case: PieceCase,
    /// `sup_η |ψ_k m(t, η)|`.
    pub symbol_sup: f64,
    /// `symbol_sup / 2^{-kσ}`.
    pub symbol_ratio: f64,
    /// `sup_x |F^{-1}(ψ_k m(t, ·))(x)|`.
    pub kernel_sup: f64,
    /// `kernel_sup / 2^{k(n-σ-nσ/2)}`.
    pub kernel_ratio: f64,
}

/// Dyadic pieces for `k` in `ks`, in one space dimension.
pub fn dyadic_piece_norms(
    t: f64,
    ks: std::ops::RangeInclusive<i32>,
    params: &ModelParams,
    cutoffs: &CutoffConfig,
) -> Result<Vec<DyadicPiece>> {
    if params.n != 1 {
        return Err(LabError::Usage("dyadic pieces are implemented for n = 1".into()));
    }
    let sigma = params.sigma;
    let k0 = k0_of_t(t, cutoffs.eps0, sigma);
    let piece = |k: i32, eta: f64| psi_k(k, eta) * rescaled_multiplier(t, eta, params, cutoffs);
    let mut out = Vec::new();
    for k in ks {
        let lo = 2f64.powi(k - 1);
        let hi = 2f64.powi(k + 1);
        const SAMPLES: usize = 1 << 14;
        let mut sup = 0.0f64;
        let mut slope = 0.0f64;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=SAMPLES {
            let eta = lo + (hi - lo) * i as f64 / SAMPLES as f64;
            sup = sup.max(piece(k, eta).abs());
            if let Ok(w) = sigma_core::symbol::omega_tilde(t, eta, params, cutoffs) {
                if let Some((pe, pw)) = prev {
                    slope = slope.max(((w - pw) / (eta - pe)).abs());
                }
                prev = Some((eta, w));
            }
        }
        let kernel_sup = if sup == 0.0 { 0.0 } else { inverse_sup(|e| piece(k, e), hi, slope)? };
        let n = 1.0;
        out.push(DyadicPiece {
            k,
            case: piece_case(k, k0),
            symbol_sup: sup,
            symbol_ratio: sup / 2f64.powf(-(k as f64) * sigma),
            kernel_sup,
            kernel_ratio: kernel_sup / 2f64.powf(k as f64 * (n - sigma - n * sigma / 2.0)),
        });
    }
    Ok(out)
}

/// `sup_x |(2π)^{-1} ∫ g(η) e^{iηx} dη|` for even `g` supported in `|η| <= reach`,
/// sampled by an oversampled FFT; `slope` bounds the phase derivative.
fn inverse_sup<G: Fn(f64) -> f64>(g: G, reach: f64, slope: f64) -> Result<f64> {
    let spread = 4.0 * slope.max(1.0) + 16.0 / reach.min(1.0);
    let d_eta = (2.0 * PI / spread).min(reach / 512.0);
    let needed = (2.0 * reach / d_eta).ceil() as usize;
    let n = (needed * 8).next_power_of_two();
    if n > 1 << 23 {
        return Err(LabError::Numerical(format!("inverse transform needs {n} samples")));
    }
    let mut data: Vec<Complex64> = (0..n)
        .map(|j| {
            let idx = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            Complex64::new(g((idx * d_eta).abs()), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut data);
    let scale = d_eta / (2.0 * PI);
    Ok(data.iter().fold(0.0f64, |m, z| m.max(z.norm())) * scale)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitComparison {
    pub split_exponent: f64,
    pub unsplit_exponent: f64,
    /// The split exponent is strictly smaller.
    pub split_tighter: bool,
    pub measured: DecaySeries,
    pub measured_fit: Option<RateFit>,
    /// Constant fitted on the first half of the samples against the tighter envelope.
    pub envelope_constant: f64,
    /// All samples lie below `1.25 ×` that constant times the tighter envelope.
    pub below_envelope: bool,
}

/// Exponent obtained by estimating the rescaled low-frequency kernel piece by piece.
pub fn split_exponent(spec: &EstimateSpec, params: &ModelParams) -> f64 {
    let n = params.dim();
    1.0 - n / params.sigma * spec.gap() - spec.derivative_order() / params.sigma - spec.ell as f64
}

/// Exponent obtained by estimating the low-frequency kernel without the dyadic split.
pub fn unsplit_exponent(spec: &EstimateSpec, params: &ModelParams) -> f64 {
    let n = params.dim();
    let tt = 2.0 * params.theta;
    params.sigma / tt - n / tt * spec.gap() - spec.derivative_order() / tt - params.sigma / tt * spec.ell as f64
}

pub fn split_compare(
    u1: &Field,
    times: &[f64],
    spec: &EstimateSpec,
    params: &ModelParams,
    cutoffs: &CutoffConfig,
    c_valid: f64,
) -> Result<SplitComparison> {
    spec.validate()?;
    let split = split_exponent(spec, params);
    let unsplit = unsplit_exponent(spec, params);
    let norm = NormSpec { q: spec.q, beta: [spec.beta, 0, 0], b: spec.b, ell: spec.ell, zone: Zone::Low };
    let measured = decay_series_grid(u1, times, &norm, params, cutoffs, c_valid)?;
    let measured_fit = measured.fit((0.0, f64::INFINITY), FitModel::Power).ok();
    let tight = split.min(unsplit);
    let ratios: Vec<f64> =
        measured.times.iter().zip(&measured.values).map(|(t, v)| v / (1.0 + t).powf(tight)).collect();
    let half = (ratios.len() + 1) / 2;
    let envelope_constant = ratios[..half].iter().cloned().fold(0.0, f64::max);
    let below_envelope = ratios.iter().all(|r| *r <= 1.25 * envelope_constant);
    Ok(SplitComparison {
        split_exponent: split,
        unsplit_exponent: unsplit,
        split_tighter: split < unsplit,
        measured,
        measured_fit,
        envelope_constant,
        below_envelope,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionDecayReport {
    pub nu: f64,
    pub mu: f64,
    pub times: Vec<f64>,
    /// `∫_0^t (t-s)^{-ν}(1+s)^{-μ} ds / (1+t)^{-ν}` at each time.
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
}

/// Checks that the singular time convolution decays like `(1+t)^{-ν}`.
pub fn convolution_decay_check(nu: f64, mu: f64, times: &[f64]) -> Result<ConvolutionDecayReport> {
    let opts = QuadOptions { rtol: 1e-10, ..Default::default() };
    let ratios: Result<Vec<f64>> = times
        .iter()
        .map(|&t| Ok(singular_convolution(t, nu, mu, &opts)? / (1.0 + t).powf(-nu)))
        .collect();
    let ratios = ratios?;
    let sup_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(ConvolutionDecayReport { nu, mu, times: times.to_vec(), ratios, sup_ratio })
}
