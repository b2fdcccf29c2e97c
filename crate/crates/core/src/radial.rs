//! `L²` norms of radial Fourier multipliers applied to radial data, computed by
//! Plancherel and a one-dimensional quadrature in `|ξ|`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{CoreError, Result};
use crate::exponents::ModelParams;
use crate::quadrature::{integrate, tidy_breaks, QuadOptions};
use crate::symbol::{double_root_radius, Coefficients, CutoffConfig, Zone};

/// Fourier transform of radial data as a function of `|ξ|`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum RadialProfile {
    /// Transform of `amplitude · exp(-|x|²/(2 width²))`.
    Gaussian { amplitude: f64, width: f64 },
    /// Samples on increasing radii, linearly interpolated and zero beyond the last.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl RadialProfile {
    pub fn gaussian(amplitude: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && amplitude.is_finite()) {
            return Err(CoreError::Domain("gaussian width must be positive"));
        }
        Ok(RadialProfile::Gaussian { amplitude, width })
    }

    pub fn eval(&self, rho: f64, n: u32) -> f64 {
        match self {
            RadialProfile::Gaussian { amplitude, width } => {
                let s2 = width * width;
                amplitude * libm::pow(2.0 * PI * s2, 0.5 * n as f64) * libm::exp(-0.5 * s2 * rho * rho)
            }
            RadialProfile::Tabulated { radii, values } => {
                if radii.is_empty() || rho > radii[radii.len() - 1] {
                    return 0.0;
                }
                let i = radii.partition_point(|&r| r < rho);
                if i == 0 {
                    return values[0];
                }
                let (r0, r1) = (radii[i - 1], radii[i]);
                let w = (rho - r0) / (r1 - r0);
                values[i - 1] * (1.0 - w) + values[i] * w
            }
        }
    }

    /// Radius beyond which the profile is negligible (below `1e-17` relative in square).
    pub fn support_radius(&self) -> f64 {
        match self {
            RadialProfile::Gaussian { width, .. } => 9.0 / width,
            RadialProfile::Tabulated { radii, .. } => radii.last().copied().unwrap_or(0.0),
        }
    }

    /// Typical frequency scale of the profile.
    pub fn scale(&self) -> f64 {
        match self {
            RadialProfile::Gaussian { width, .. } => 1.0 / width,
            RadialProfile::Tabulated { radii, .. } => radii.last().copied().unwrap_or(1.0) / 4.0,
        }
    }
}

/// A radial multiplier frozen at one time.
pub trait RadialSymbol {
    /// `|m(|ξ|)|²`.
    fn modulus_sq(&self, rho: f64) -> f64;

    /// Phase `t ω(|ξ|)` of the oscillation, used to size quadrature panels.
    fn phase(&self, _rho: f64) -> Option<f64> {
        None
    }

    /// Radii where the multiplier changes character.
    fn scales(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `|ξ|^b ∂_t^ell K̂(t, |ξ|)` restricted to a frequency zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSymbol {
    pub params: ModelParams,
    pub t: f64,
    pub b: f64,
    pub ell: u32,
    pub zone: Zone,
    pub cutoffs: CutoffConfig,
}

impl KernelSymbol {
    pub fn value(&self, rho: f64) -> f64 {
        let w = self.cutoffs.weight(self.zone, rho);
        if w == 0.0 {
            return 0.0;
        }
        let c = Coefficients::at(rho, &self.params);
        let m = c.propagator(self.t);
        let (mut k, mut dk) = (m.e1, m.de1);
        for _ in 0..self.ell {
            let next = -c.b * dk - c.a * k;
            k = dk;
            dk = next;
        }
        let deriv = if self.b == 0.0 { 1.0 } else { libm::pow(rho, self.b) };
        w * deriv * k
    }
}

fn kernel_phase(params: &ModelParams, t: f64, rho: f64) -> f64 {
    let c = Coefficients::at(rho, params);
    if c.d < 0.0 {
        t * libm::sqrt(-c.d)
    } else {
        0.0
    }
}

fn kernel_scales(params: &ModelParams, t: f64, cutoffs: &CutoffConfig) -> Vec<f64> {
    let mut s = vec![
        libm::pow(t, -1.0 / (2.0 * params.theta.max(1e-3))),
        libm::pow(t, -1.0 / params.sigma),
        0.5 * cutoffs.eps0,
        cutoffs.eps0,
        cutoffs.n_inf,
        2.0 * cutoffs.n_inf,
    ];
    if let Some(r) = double_root_radius(params) {
        s.push(r);
    }
    s
}

impl RadialSymbol for KernelSymbol {
    fn modulus_sq(&self, rho: f64) -> f64 {
        let v = self.value(rho);
        v * v
    }
    fn phase(&self, rho: f64) -> Option<f64> {
        Some(kernel_phase(&self.params, self.t, rho))
    }
    fn scales(&self) -> Vec<f64> {
        kernel_scales(&self.params, self.t, &self.cutoffs)
    }
}

/// `|ξ|^{2σ} K̂² + (∂_t K̂)²`, whose integral against `|û_1|²` is twice the energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySymbol {
    pub params: ModelParams,
    pub t: f64,
    pub zone: Zone,
    pub cutoffs: CutoffConfig,
}

impl RadialSymbol for EnergySymbol {
    fn modulus_sq(&self, rho: f64) -> f64 {
        let w = self.cutoffs.weight(self.zone, rho);
        if w == 0.0 {
            return 0.0;
        }
        let c = Coefficients::at(rho, &self.params);
        let m = c.propagator(self.t);
        w * w * (c.a * m.e1 * m.e1 + m.de1 * m.de1)
    }
    fn phase(&self, rho: f64) -> Option<f64> {
        Some(kernel_phase(&self.params, self.t, rho))
    }
    fn scales(&self) -> Vec<f64> {
        kernel_scales(&self.params, self.t, &self.cutoffs)
    }
}

/// Surface area of the unit sphere in `R^n`.
pub fn sphere_area(n: u32) -> f64 {
    let h = 0.5 * n as f64;
    2.0 * libm::pow(PI, h) / libm::tgamma(h)
}

/// `((2π)^{-n} |S^{n-1}| ∫ |m û|² ρ^{n-1} dρ)^{1/2}`.
pub fn radial_l2_norm<S: RadialSymbol + ?Sized>(
    profile: &RadialProfile,
    symbol: &S,
    n: u32,
    opts: &QuadOptions,
) -> Result<f64> {
    if n == 0 {
        return Err(CoreError::Domain("dimension must be positive"));
    }
    let top = profile.support_radius();
    if !(top > 0.0) {
        return Ok(0.0);
    }
    let mut pts = symbol.scales();
    pts.push(profile.scale());
    let mut x = top;
    while x > top * 1e-14 {
        pts.push(x);
        x *= 0.5;
    }
    let coarse = tidy_breaks(pts, 0.0, top);
    let breaks = match symbol.phase(top) {
        Some(_) => split_by_phase(&coarse, |r| symbol.phase(r).unwrap_or(0.0)),
        None => coarse,
    };
    let power = n as i32 - 1;
    let integrand = |r: f64| {
        let v = profile.eval(r, n);
        symbol.modulus_sq(r) * v * v * libm::pow(r, power as f64)
    };
    let res = integrate(integrand, &breaks, opts)?;
    let scale = sphere_area(n) / libm::pow(2.0 * PI, n as f64);
    Ok(libm::sqrt((scale * res.value).max(0.0)))
}

/// Subdivides segments so that no panel spans more than a quarter period.
fn split_by_phase<P: Fn(f64) -> f64>(coarse: &[f64], phase: P) -> Vec<f64> {
    const PROBES: usize = 32;
    let mut out = Vec::with_capacity(coarse.len());
    out.push(coarse[0]);
    for w in coarse.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut variation = 0.0;
        let mut prev = phase(a);
        for i in 1..=PROBES {
            let cur = phase(a + (b - a) * i as f64 / PROBES as f64);
            variation += (cur - prev).abs();
            prev = cur;
        }
        let pieces = libm::ceil(variation / (0.5 * PI)).clamp(1.0, 1e6) as usize;
        for i in 1..pieces {
            out.push(a + (b - a) * i as f64 / pieces as f64);
        }
        out.push(b);
    }
    out
}
