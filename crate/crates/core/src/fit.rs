//! Least-squares fits of decay laws to time series.

use alloc::vec::Vec;

use crate::error::{CoreError, Result};

/// Minimum number of samples inside a fitting window.
pub const MIN_SAMPLES: usize = 8;

/// Law fitted to `value(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FitModel {
    /// `C (1+t)^slope`.
    Power,
    /// `C (1+t)^slope log(e+t)^c`.
    PowerLog,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateFit {
    pub slope: f64,
    /// Exponent of `log(e+t)`; zero for [`FitModel::Power`].
    pub log_coefficient: f64,
    pub r_squared: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
}

/// Fits `model` to the samples with `t` in `[window.0, window.1]`.
pub fn fit_rate(times: &[f64], values: &[f64], window: (f64, f64), model: FitModel) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(CoreError::Domain("times and values differ in length"));
    }
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    let (mut t_min, mut t_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (&t, &v) in times.iter().zip(values) {
        if t < window.0 * (1.0 - 1e-12) || t > window.1 * (1.0 + 1e-12) {
            continue;
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(CoreError::Domain("fitted values must be positive and finite"));
        }
        let e = core::f64::consts::E;
        rows.push((libm::log1p(t), libm::log(libm::log(e + t)), libm::log(v)));
        t_min = t_min.min(t);
        t_max = t_max.max(t);
    }
    if rows.len() < MIN_SAMPLES {
        return Err(CoreError::InsufficientSamples { have: rows.len(), need: MIN_SAMPLES });
    }
    let m = rows.len() as f64;
    let mean = |f: &dyn Fn(&(f64, f64, f64)) -> f64| rows.iter().map(f).sum::<f64>() / m;
    let (mx, mz, my) = (mean(&|r| r.0), mean(&|r| r.1), mean(&|r| r.2));
    let (mut sxx, mut sxz, mut szz, mut sxy, mut szy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, z, y) in &rows {
        let (dx, dz, dy) = (x - mx, z - mz, y - my);
        sxx += dx * dx;
        sxz += dx * dz;
        szz += dz * dz;
        sxy += dx * dy;
        szy += dz * dy;
        syy += dy * dy;
    }
    let (slope, log_coefficient) = match model {
        FitModel::Power => {
            if sxx == 0.0 {
                return Err(CoreError::Domain("window spans a single time"));
            }
            (sxy / sxx, 0.0)
        }
        FitModel::PowerLog => {
            let det = sxx * szz - sxz * sxz;
            if !(det.abs() > 1e-14 * sxx * szz) {
                return Err(CoreError::Domain("power and log regressors are collinear"));
            }
            ((sxy * szz - szy * sxz) / det, (szy * sxx - sxy * sxz) / det)
        }
    };
    let explained = slope * sxy + log_coefficient * szy;
    let r_squared = if syy == 0.0 { 1.0 } else { (explained / syy).clamp(0.0, 1.0) };
    Ok(RateFit { slope, log_coefficient, r_squared, t_min, t_max, samples: rows.len() })
}

/// Fits `C exp(-c t)` and returns `(c, r²)`.
pub fn fit_exponential(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| **t >= window.0 * (1.0 - 1e-12) && **t <= window.1 * (1.0 + 1e-12) && **v > 0.0 && v.is_finite())
        .map(|(t, v)| (*t, libm::log(*v)))
        .collect();
    if pts.len() < MIN_SAMPLES {
        return Err(CoreError::InsufficientSamples { have: pts.len(), need: MIN_SAMPLES });
    }
    let m = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        stt += (t - mt) * (t - mt);
        sty += (t - mt) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sty / stt;
    let r2 = if syy == 0.0 { 1.0 } else { (slope * sty / syy).clamp(0.0, 1.0) };
    Ok((-slope, r2))
}

/// `n` points spaced geometrically from `a` to `b`.
pub fn log_times(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return alloc::vec![a];
    }
    let (la, lb) = (libm::log(a), libm::log(b));
    (0..n).map(|i| libm::exp(la + (lb - la) * i as f64 / (n - 1) as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_log() {
        let ts = log_times(10.0, 1e4, 30);
        let vs: Vec<f64> = ts
            .iter()
            .map(|t| 3.0 * (1.0 + t).powf(-0.5) * (core::f64::consts::E + t).ln())
            .collect();
        let f = fit_rate(&ts, &vs, (0.0, f64::INFINITY), FitModel::PowerLog).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-9);
        assert!((f.log_coefficient - 1.0).abs() < 1e-8);
        assert!(f.r_squared > 0.999_999);
    }

    #[test]
    fn needs_enough_samples() {
        let ts = log_times(1.0, 10.0, 5);
        let vs = ts.clone();
        assert!(matches!(
            fit_rate(&ts, &vs, (0.0, 100.0), FitModel::Power),
            Err(CoreError::InsufficientSamples { have: 5, need: 8 })
        ));
    }

    #[test]
    fn exponential_rate() {
        let ts: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let vs: Vec<f64> = ts.iter().map(|t| 2.0 * (-3.0 * t).exp()).collect();
        let (c, r2) = fit_exponential(&ts, &vs, (0.0, 100.0)).unwrap();
        assert!((c - 3.0).abs() < 1e-10 && r2 > 0.999_999);
    }
}
