//! Fourier symbols of the linear operator: characteristic roots, the fundamental
//! solution `K̂(t, |ξ|)`, the 2x2 propagator, and smooth cutoffs.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::exponents::ModelParams;

/// A frequency magnitude together with a time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolPoint {
    pub rho: f64,
    pub t: f64,
}

/// Solution operator acting on `(û, û_t)`:
/// `û(t) = e0 û(0) + e1 û_t(0)`, `û_t(t) = de0 û(0) + de1 û_t(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    pub e0: f64,
    pub e1: f64,
    pub de0: f64,
    pub de1: f64,
}

impl Propagator {
    pub const IDENTITY: Propagator = Propagator { e0: 1.0, e1: 0.0, de0: 0.0, de1: 1.0 };

    pub fn det(&self) -> f64 {
        self.e0 * self.de1 - self.e1 * self.de0
    }

    /// Matrix product `self * rhs`, i.e. evolve by `rhs` first.
    pub fn compose(&self, rhs: &Propagator) -> Propagator {
        Propagator {
            e0: self.e0 * rhs.e0 + self.e1 * rhs.de0,
            e1: self.e0 * rhs.e1 + self.e1 * rhs.de1,
            de0: self.de0 * rhs.e0 + self.de1 * rhs.de0,
            de1: self.de0 * rhs.e1 + self.de1 * rhs.de1,
        }
    }

    pub fn apply(&self, u: f64, v: f64) -> (f64, f64) {
        (self.e0 * u + self.e1 * v, self.de0 * u + self.de1 * v)
    }
}

/// Coefficients of `λ² + b λ + a = 0` at one frequency, with the signed
/// discriminant `d = b²/4 - a` in a cancellation-free form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl Coefficients {
    pub fn at(rho: f64, params: &ModelParams) -> Coefficients {
        let a = libm::pow(rho, 2.0 * params.sigma);
        let b = libm::pow(rho, 2.0 * params.theta);
        let d = if a == 0.0 {
            0.25 * b * b
        } else {
            let half_x = 0.5 * libm::pow(rho, 2.0 * params.theta - params.sigma);
            a * (half_x - 1.0) * (half_x + 1.0)
        };
        Coefficients { a, b, d }
    }

    /// Propagator over a time span `t >= 0`.
    pub fn propagator(&self, t: f64) -> Propagator {
        let Coefficients { a, b, d } = *self;
        let z = d * t * t;
        let (e0, e1, de1) = if z.abs() <= 1.0 {
            let damp = libm::exp(-0.5 * b * t);
            let (s, c) = entire_pair(z);
            let drift = 0.5 * b * t * s;
            (damp * (c + drift), damp * t * s, damp * (c - drift))
        } else if z < 0.0 {
            let damp = libm::exp(-0.5 * b * t);
            let w = libm::sqrt(-d);
            let (sn, cs) = libm::sincos(w * t);
            let sw = sn / w;
            (damp * (cs + 0.5 * b * sw), damp * sw, damp * (cs - 0.5 * b * sw))
        } else {
            let mu = libm::sqrt(d);
            let slow_gap = 0.5 * b + mu;
            let fast = -slow_gap;
            let slow = -a / slow_gap;
            let lead = libm::exp(slow * t);
            let ratio = libm::exp(-2.0 * mu * t);
            let inv = 1.0 / (2.0 * mu);
            (
                lead * (slow * ratio - fast) * inv,
                -lead * libm::expm1(-2.0 * mu * t) * inv,
                lead * (slow - fast * ratio) * inv,
            )
        };
        Propagator { e0, e1, de0: -a * e1, de1 }
    }
}

/// `(sinh √z / √z, cosh √z)` for `|z| <= 1` by their power series.
fn entire_pair(z: f64) -> (f64, f64) {
    let mut s = 1.0;
    let mut c = 1.0;
    let mut ts = 1.0;
    let mut tc = 1.0;
    for k in 1..24 {
        let k2 = 2.0 * k as f64;
        tc *= z / ((k2 - 1.0) * k2);
        ts *= z / (k2 * (k2 + 1.0));
        c += tc;
        s += ts;
        if ts.abs() < 1e-18 && tc.abs() < 1e-18 {
            break;
        }
    }
    (s, c)
}

/// `ω(ξ) = |ξ|^σ sqrt(1 - |ξ|^{4θ-2σ}/4)`, defined where the roots are complex.
pub fn omega(rho: f64, params: &ModelParams) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(CoreError::Domain("frequency must be positive"));
    }
    let c = Coefficients::at(rho, params);
    if c.d < 0.0 {
        Ok(libm::sqrt(-c.d))
    } else {
        Err(CoreError::Regime { rho })
    }
}

/// Characteristic roots `(λ+, λ-)`; `λ+` has the smaller `|Re|`.
pub fn lambda_pm(rho: f64, params: &ModelParams) -> Result<(Complex64, Complex64)> {
    if !(rho > 0.0) {
        return Err(CoreError::Domain("frequency must be positive"));
    }
    let Coefficients { a, b, d } = Coefficients::at(rho, params);
    if d < 0.0 {
        let w = libm::sqrt(-d);
        Ok((Complex64::new(-0.5 * b, w), Complex64::new(-0.5 * b, -w)))
    } else {
        let fast = -0.5 * b - libm::sqrt(d);
        Ok((Complex64::new(a / fast, 0.0), Complex64::new(fast, 0.0)))
    }
}

/// Fundamental solution `K̂(t, |ξ|)`.
pub fn khat(t: f64, rho: f64, params: &ModelParams) -> f64 {
    Coefficients::at(rho, params).propagator(t).e1
}

pub fn propagator(t: f64, rho: f64, params: &ModelParams) -> Propagator {
    Coefficients::at(rho, params).propagator(t)
}

/// `∂_t^ell K̂(t, |ξ|)` using `K̂'' = -b K̂' - a K̂`.
pub fn khat_time_derivative(ell: u32, t: f64, rho: f64, params: &ModelParams) -> f64 {
    let c = Coefficients::at(rho, params);
    let m = c.propagator(t);
    let (mut k, mut dk) = (m.e1, m.de1);
    for _ in 0..ell {
        let next = -c.b * dk - c.a * k;
        k = dk;
        dk = next;
    }
    k
}

/// `K̂ = (e^{λ+ t} - e^{λ- t}) / (λ+ - λ-)` evaluated in complex arithmetic.
pub fn khat_two_exponential(t: f64, rho: f64, params: &ModelParams) -> Result<f64> {
    let (lp, lm) = lambda_pm(rho, params)?;
    let diff = lp - lm;
    if diff.norm() == 0.0 {
        return Err(CoreError::Regime { rho });
    }
    let num = (lp * t).exp() - (lm * t).exp();
    Ok((num / diff).re)
}

/// `K̂ = t e^{-|ξ|^{2θ} t/2} sinc(t ω)`, valid in the oscillatory regime.
pub fn khat_sinc(t: f64, rho: f64, params: &ModelParams) -> Result<f64> {
    let w = omega(rho, params)?;
    let b = libm::pow(rho, 2.0 * params.theta);
    Ok(t * libm::exp(-0.5 * b * t) * sinc(t * w))
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        libm::sin(x) / x
    }
}

/// Radius `2^{1/(2θ-σ)}` where the two roots coincide.
pub fn double_root_radius(params: &ModelParams) -> Option<f64> {
    let gap = 2.0 * params.theta - params.sigma;
    if gap == 0.0 {
        None
    } else {
        Some(libm::exp2(1.0 / gap))
    }
}

/// Smooth monotone step: 0 for `x <= 0`, 1 for `x >= 1`, built from `exp(-1/x)`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let g = |y: f64| libm::exp(-1.0 / y);
        let left = g(x);
        left / (left + g(1.0 - x))
    }
}

/// Radii of the low- and high-frequency cutoffs.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct CutoffConfig {
    /// Low-frequency cutoff equals 1 on `|ξ| <= eps0/2` and 0 beyond `eps0`.
    pub eps0: f64,
    /// High-frequency cutoff equals 0 on `|ξ| <= n_inf` and 1 beyond `2 n_inf`.
    pub n_inf: f64,
}

impl CutoffConfig {
    pub fn new(eps0: f64, n_inf: f64, params: &ModelParams) -> Result<Self> {
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return Err(CoreError::Domain("eps0 must lie in (0, 1)"));
        }
        if !(n_inf > 1.0 && n_inf.is_finite()) {
            return Err(CoreError::Domain("n_inf must exceed 1"));
        }
        if params.is_noneffective() {
            if let Some(r) = double_root_radius(params) {
                if n_inf <= 2.0 * r {
                    return Err(CoreError::Domain("n_inf must exceed twice the double-root radius"));
                }
            }
        }
        Ok(CutoffConfig { eps0, n_inf })
    }

    /// `eps0 = 1/4`, `n_inf = max(8, 4 · 2^{1/(2θ-σ)})`.
    pub fn default_for(params: &ModelParams) -> CutoffConfig {
        let n_inf = match double_root_radius(params) {
            Some(r) if params.is_noneffective() => (4.0 * r).max(8.0),
            _ => 8.0,
        };
        CutoffConfig { eps0: 0.25, n_inf }
    }

    pub fn low(&self, rho: f64) -> f64 {
        let h = 0.5 * self.eps0;
        1.0 - smooth_step((rho - h) / h)
    }

    pub fn high(&self, rho: f64) -> f64 {
        smooth_step((rho - self.n_inf) / self.n_inf)
    }

    pub fn mid(&self, rho: f64) -> f64 {
        1.0 - self.low(rho) - self.high(rho)
    }

    pub fn weight(&self, zone: Zone, rho: f64) -> f64 {
        match zone {
            Zone::Full => 1.0,
            Zone::Low => self.low(rho),
            Zone::Mid => self.mid(rho),
            Zone::High => self.high(rho),
        }
    }
}

/// Frequency zone selected by the cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Zone {
    Full,
    Low,
    Mid,
    High,
}

impl Zone {
    pub fn as_str(self) -> &'static str {
        match self {
            Zone::Full => "full",
            Zone::Low => "low",
            Zone::Mid => "mid",
            Zone::High => "high",
        }
    }
}

/// Littlewood-Paley profile: 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
pub fn lp_base(r: f64) -> f64 {
    1.0 - smooth_step(2.0 * r - 1.0)
}

/// `ψ(r) = φ(r/2) - φ(r)`, supported in `(1/2, 2)`.
pub fn psi(r: f64) -> f64 {
    lp_base(0.5 * r) - lp_base(r)
}

/// `ψ_k(r) = ψ(2^{-k} r)`.
pub fn psi_k(k: i32, r: f64) -> f64 {
    psi(libm::scalbn(r, -k))
}

/// Largest `k` with `2^k <= eps0 t^{1/σ}`.
pub fn k0_of_t(t: f64, eps0: f64, sigma: f64) -> i32 {
    let v = eps0 * libm::pow(t, 1.0 / sigma);
    let mut k = libm::floor(libm::log2(v)) as i32;
    while libm::scalbn(1.0, k + 1) <= v {
        k += 1;
    }
    while libm::scalbn(1.0, k) > v {
        k -= 1;
    }
    k
}

/// Inner cutoff in rescaled variables: 1 on `|η| <= 1`, 0 beyond 2.
pub fn inner_cutoff(eta: f64) -> f64 {
    1.0 - smooth_step(eta.abs() - 1.0)
}

/// `ω̃(t, η) = |η|^σ sqrt(1 - t^{2-4θ/σ} |η|^{4θ-2σ}/4)` on `|η| <= eps0 t^{1/σ}`.
pub fn omega_tilde(t: f64, eta: f64, params: &ModelParams, cutoffs: &CutoffConfig) -> Result<f64> {
    let eta = eta.abs();
    if eta > cutoffs.eps0 * libm::pow(t, 1.0 / params.sigma) {
        return Err(CoreError::Domain("rescaled frequency outside the low-frequency ball"));
    }
    let (s, th) = (params.sigma, params.theta);
    let inner = libm::pow(t, 2.0 - 4.0 * th / s) * libm::pow(eta, 4.0 * th - 2.0 * s) / 4.0;
    Ok(libm::pow(eta, s) * libm::sqrt(1.0 - inner))
}

/// Rescaled low-frequency multiplier `(1-χ(η)) φ_0(t^{-1/σ}η) sinc ω̃(t, η)`.
pub fn rescaled_multiplier(t: f64, eta: f64, params: &ModelParams, cutoffs: &CutoffConfig) -> f64 {
    let eta = eta.abs();
    let outer = cutoffs.low(eta * libm::pow(t, -1.0 / params.sigma));
    let inner = 1.0 - inner_cutoff(eta);
    if outer == 0.0 || inner == 0.0 {
        return 0.0;
    }
    match omega_tilde(t, eta, params, cutoffs) {
        Ok(w) => inner * outer * sinc(w),
        Err(_) => 0.0,
    }
}

/// Shape of the dyadic piece `ψ_k m(t, ·)` relative to `k0(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum PieceCase {
    /// Identically zero.
    Zero,
    /// Touched by the inner cutoff `1 - χ`.
    Inner,
    /// Pure `ψ_k sinc ω̃`.
    Clean,
    /// Touched by the outer cutoff `φ_0(t^{-1/σ} ·)`.
    Outer,
    /// Touched by both cutoffs.
    InnerOuter,
}

pub fn piece_case(k: i32, k0: i32) -> PieceCase {
    if k <= -1 || k >= k0 + 2 {
        PieceCase::Zero
    } else {
        match (k <= 1, k >= k0 - 1) {
            (true, true) => PieceCase::InnerOuter,
            (true, false) => PieceCase::Inner,
            (false, true) => PieceCase::Outer,
            (false, false) => PieceCase::Clean,
        }
    }
}
