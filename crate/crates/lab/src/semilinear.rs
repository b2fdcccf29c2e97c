//! Semilinear runs with source `|u|^{1+α}` or `|u_t|^{1+α}`.
//!
//! The state `(û, û_t)` is advanced in Fourier space with an exponential
//! integrator (exact linear propagation, linearly interpolated forcing, one
//! predictor-corrector pass). Steps are powers of two times the initial step
//! and are controlled by step doubling.

use std::collections::VecDeque;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sigma_core::duhamel::{step_weights, StepWeights};
use sigma_core::exponents::{alpha0, alpha1, nbar, Lebesgue, ModelParams, Problem, EQ_TOL};
use sigma_core::fit::{fit_rate, FitModel, RateFit};
use sigma_core::symbol::Coefficients;

use crate::error::{LabError, Result};
use crate::field::{gaussian_data, lp_norm_of, parity, sup_norm, transform, Field, Grid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemilinearConfig {
    pub params: ModelParams,
    pub problem: Problem,
    pub alpha: f64,
    /// Amplitude of the Gaussian initial velocity.
    pub epsilon: f64,
    /// Width of the Gaussian initial velocity.
    pub data_width: f64,
    pub grid: Grid,
    pub t_end: f64,
    /// Initial step; every step is this times a power of two, or shorter to land on a checkpoint.
    pub dt: f64,
    pub dt_max: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Blow-up once `max(‖u‖_∞, ‖u_t‖_∞)` exceeds this multiple of `‖u_1‖_∞`.
    pub blowup_factor: f64,
    /// Consecutive rejected steps tolerated before declaring blow-up.
    pub max_halvings: u32,
    /// Late window starts at `late_fraction · t_end`.
    pub late_fraction: f64,
    /// Allowed excess of the late `‖u‖_∞` slope over the predicted one.
    pub slope_tolerance: f64,
    /// Allowed growth of the weighted monitor over the late window.
    pub growth_factor: f64,
    pub checkpoints_per_octave: u32,
    /// Reject parameter regimes outside the hypotheses of the existence results.
    pub strict_hypotheses: bool,
}

impl SemilinearConfig {
    pub fn new(params: ModelParams, problem: Problem, alpha: f64, epsilon: f64, grid: Grid) -> Self {
        SemilinearConfig {
            params,
            problem,
            alpha,
            epsilon,
            data_width: 1.0,
            grid,
            t_end: 100.0,
            dt: 0.0625,
            dt_max: 4.0,
            rtol: 1e-5,
            atol: 1e-9,
            blowup_factor: 1e6,
            max_halvings: 40,
            late_fraction: 0.1,
            slope_tolerance: 0.2,
            growth_factor: 10.0,
            checkpoints_per_octave: 4,
            strict_hypotheses: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bad = |m: &str| Err(LabError::Config(m.to_string()));
        if self.grid.dim != self.params.n as usize {
            return bad("grid dimension must equal the model dimension");
        }
        if !(self.alpha > 0.0) {
            return bad("alpha must be positive");
        }
        if !self.epsilon.is_finite() {
            return bad("epsilon must be finite");
        }
        if !(self.data_width > 0.0) {
            return bad("data_width must be positive");
        }
        if !(self.t_end > 0.0 && self.dt > 0.0 && self.dt_max >= self.dt && self.dt <= self.t_end) {
            return bad("need 0 < dt <= dt_max and dt <= t_end");
        }
        if !(self.rtol > 0.0 && self.atol >= 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.late_fraction > 0.0 && self.late_fraction < 1.0) {
            return bad("late_fraction must lie in (0, 1)");
        }
        if self.checkpoints_per_octave == 0 {
            return bad("checkpoints_per_octave must be positive");
        }
        if self.strict_hypotheses && !self.within_hypotheses() {
            return bad(match self.problem {
                Problem::UPower => {
                    "strict mode: u-power needs noneffective damping and either 1 < sigma < n <= nbar(sigma) or n = 1 with 0.4 <= sigma < 1"
                }
                Problem::UtPower => "strict mode: ut-power needs noneffective damping, sigma >= 3 and n <= sigma - 2",
            });
        }
        Ok(())
    }

    /// Whether the parameters satisfy the hypotheses under which small-data global existence is known.
    pub fn within_hypotheses(&self) -> bool {
        let p = &self.params;
        let (s, n) = (p.sigma, p.dim());
        p.is_noneffective()
            && match self.problem {
                Problem::UPower => (s > 1.0 && s < n && n <= nbar(s) + EQ_TOL) || (p.n == 1 && (0.4..1.0).contains(&s)),
                Problem::UtPower => s >= 3.0 && n <= s - 2.0 + EQ_TOL,
            }
    }

    /// Halves the initial and maximal steps.
    pub fn refined_in_time(&self) -> Self {
        SemilinearConfig { dt: 0.5 * self.dt, dt_max: 0.5 * self.dt_max, ..self.clone() }
    }

    /// Doubles the points per axis at fixed box length.
    pub fn refined_in_space(&self) -> Self {
        SemilinearConfig { grid: self.grid.refined(), ..self.clone() }
    }

    /// Exponent of `‖u‖_∞` expected when the linear decay estimates persist.
    pub fn predicted_slope(&self) -> f64 {
        1.0 - self.params.dim() / self.params.sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Decaying,
    Bounded,
    BlowUp,
    Inconclusive,
    /// The run itself errored; only produced by sweeps.
    Failed,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Decaying => "decaying",
            Classification::Bounded => "bounded",
            Classification::BlowUp => "blow-up",
            Classification::Inconclusive => "inconclusive",
            Classification::Failed => "failed",
        }
    }
}

/// Norms recorded at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorSample {
    pub t: f64,
    pub u_l2: f64,
    pub u_linf: f64,
    /// `‖u‖_{L^{1+α}}`.
    pub u_lpow: f64,
    pub ut_l2: f64,
    pub ut_linf: f64,
    /// `‖u_t‖_{L^{1+α}}`.
    pub ut_lpow: f64,
    /// `‖(-Δ)^{σ/2} u‖_{L²}`.
    pub frac_l2: f64,
    pub energy: f64,
    /// Weighted sum of the linear decay norms.
    pub monitor: f64,
    /// Running maximum of the monitor plus the power-norm term of the problem.
    pub x_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlowUpReason {
    Threshold,
    NonFinite,
    StepExhaustion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Set when the parameters lie outside the known existence hypotheses.
    pub exploratory: bool,
    pub classification: Classification,
    /// Time of the last finite accepted state when blow-up was detected.
    pub t_blowup: Option<f64>,
    pub blowup_reason: Option<BlowUpReason>,
    pub late_fit: Option<RateFit>,
    pub predicted_slope: f64,
    /// Late-window maximum of the X-norm over its value before the window.
    pub monitor_growth: Option<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub samples: Vec<MonitorSample>,
}

/// Transform helper owning the mode table, the centring signs and the dealiasing mask.
struct Spectral {
    grid: Grid,
    rho: Vec<f64>,
    sign: Vec<f64>,
    keep: Vec<bool>,
}

impl Spectral {
    fn new(grid: Grid) -> Spectral {
        let cut = grid.points as i64 / 3;
        let keep = (0..grid.len())
            .map(|flat| {
                let idx = grid.unflatten(flat);
                idx[..grid.dim].iter().all(|&i| grid.signed_index(i).abs() <= cut)
            })
            .collect();
        let sign = (0..grid.len()).map(|i| parity(&grid, i)).collect();
        Spectral { grid, rho: grid.rho_table(), sign, keep }
    }

    fn volume(&self) -> f64 {
        self.grid.length.powi(self.grid.dim as i32)
    }

    /// Inverse transform of a spectrum that is known to come from a real field.
    fn to_physical(&self, spec: &[Complex64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = spec.iter().zip(&self.sign).map(|(z, s)| z * s).collect();
        transform(&mut buf, &self.grid, true);
        let scale = 1.0 / self.volume();
        buf.iter().map(|z| z.re * scale).collect()
    }

    /// Both real fields at once through `IDFT(û + i v̂) = u + i v`.
    fn to_physical_pair(&self, u: &[Complex64], v: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let i = Complex64::new(0.0, 1.0);
        let mut buf: Vec<Complex64> =
            u.iter().zip(v).zip(&self.sign).map(|((a, b), s)| (a + i * b) * s).collect();
        transform(&mut buf, &self.grid, true);
        let scale = 1.0 / self.volume();
        buf.iter().map(|z| (z.re * scale, z.im * scale)).unzip()
    }

    /// Forward transform followed by the dealiasing filter.
    fn to_spectral_filtered(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        transform(&mut buf, &self.grid, false);
        let cell = self.grid.cell_volume();
        for ((z, s), keep) in buf.iter_mut().zip(&self.sign).zip(&self.keep) {
            *z = if *keep { *z * (s * cell) } else { Complex64::new(0.0, 0.0) };
        }
        buf
    }

    fn l2(&self, spec: &[Complex64]) -> f64 {
        let s: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
        (s / self.volume()).sqrt()
    }
}

/// LRU cache of per-mode weights keyed by the bit pattern of the step.
struct WeightCache {
    entries: VecDeque<(u64, Arc<Vec<StepWeights>>)>,
    coefficients: Vec<Coefficients>,
}

impl WeightCache {
    const CAPACITY: usize = 6;

    fn get(&mut self, h: f64) -> Arc<Vec<StepWeights>> {
        let key = h.to_bits();
        if let Some(pos) = self.entries.iter().position(|(k, _)| *k == key) {
            let entry = self.entries.remove(pos).expect("position is valid");
            let w = entry.1.clone();
            self.entries.push_front(entry);
            return w;
        }
        let w: Arc<Vec<StepWeights>> = Arc::new(self.coefficients.iter().map(|c| step_weights(c, h)).collect());
        self.entries.push_front((key, w.clone()));
        self.entries.truncate(Self::CAPACITY);
        w
    }
}

#[derive(Clone)]
struct State {
    u: Vec<Complex64>,
    v: Vec<Complex64>,
    /// Forcing evaluated at this state.
    f: Vec<Complex64>,
}

struct Solver<'a> {
    cfg: &'a SemilinearConfig,
    spectral: Spectral,
    cache: WeightCache,
}

/// Spectrum of `|w|^{1+α}` for a real field `w`, with the 2/3-rule filter applied.
pub fn source_term(grid: Grid, values: &[f64], alpha: f64) -> Result<Vec<Complex64>> {
    if values.len() != grid.len() {
        return Err(LabError::Grid("field length does not match grid".into()));
    }
    let powered: Vec<f64> = values.iter().map(|x| x.abs().powf(1.0 + alpha)).collect();
    Ok(Spectral::new(grid).to_spectral_filtered(&powered))
}

impl Solver<'_> {
    fn forcing(&self, u: &[Complex64], v: &[Complex64]) -> Result<Vec<Complex64>> {
        let source = match self.cfg.problem {
            Problem::UPower => u,
            Problem::UtPower => v,
        };
        let power = 1.0 + self.cfg.alpha;
        let mut phys = self.spectral.to_physical(source);
        for x in phys.iter_mut() {
            *x = x.abs().powf(power);
        }
        Ok(self.spectral.to_spectral_filtered(&phys))
    }

    fn step(&mut self, s: &State, h: f64) -> Result<State> {
        let w = self.cache.get(h);
        let advance = |f_end: &[Complex64]| -> (Vec<Complex64>, Vec<Complex64>) {
            let mut u = Vec::with_capacity(s.u.len());
            let mut v = Vec::with_capacity(s.u.len());
            for i in 0..s.u.len() {
                let (a, b) = w[i].advance(s.u[i], s.v[i], s.f[i], f_end[i]);
                u.push(a);
                v.push(b);
            }
            (u, v)
        };
        let (up, vp) = advance(&s.f);
        let f_pred = self.forcing(&up, &vp)?;
        let (u, v) = advance(&f_pred);
        let f = self.forcing(&u, &v)?;
        Ok(State { u, v, f })
    }

    fn error(&self, coarse: &State, fine: &State, scale: f64) -> f64 {
        let diff = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
        let eu = self.spectral.l2(&diff(&coarse.u, &fine.u)) / 3.0;
        let ev = self.spectral.l2(&diff(&coarse.v, &fine.v)) / 3.0;
        let tol_u = self.cfg.atol * scale + self.cfg.rtol * self.spectral.l2(&fine.u);
        let tol_v = self.cfg.atol * scale + self.cfg.rtol * self.spectral.l2(&fine.v);
        let ratio = |e: f64, tol: f64| if e == 0.0 { 0.0 } else { e / tol };
        ratio(eu, tol_u).max(ratio(ev, tol_v))
    }

    fn finite(s: &State) -> bool {
        s.u.iter().chain(&s.v).all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn sample(&self, t: f64, s: &State, prev_x: f64) -> Result<MonitorSample> {
        let p = &self.cfg.params;
        let n = p.dim();
        let vol = self.spectral.grid.cell_volume();
        let pow = Lebesgue::finite(1.0 + self.cfg.alpha)?;
        let (u_phys, v_phys) = self.spectral.to_physical_pair(&s.u, &s.v);
        let u_l2 = self.spectral.l2(&s.u);
        let ut_l2 = self.spectral.l2(&s.v);
        let frac_sq: f64 = s
            .u
            .iter()
            .zip(&self.spectral.rho)
            .map(|(z, r)| z.norm_sqr() * r.powf(2.0 * p.sigma))
            .sum::<f64>()
            / self.spectral.volume();
        let frac_l2 = frac_sq.sqrt();
        let u_linf = sup_norm(&u_phys, &self.cfg.grid);
        let ut_linf = sup_norm(&v_phys, &self.cfg.grid);
        let u_lpow = lp_norm_of(&u_phys, vol, pow);
        let ut_lpow = lp_norm_of(&v_phys, vol, pow);
        let tt = 1.0 + t;
        let two_sigma = 2.0 * p.sigma;
        let l2_weight = if (n - two_sigma).abs() <= EQ_TOL {
            1.0 / (std::f64::consts::E + t).ln()
        } else if n < two_sigma {
            tt.powf(-1.0 + n / two_sigma)
        } else {
            tt.powf((n - two_sigma) / (4.0 * p.theta))
        };
        let monitor = tt.powf(n / (4.0 * p.theta)) * frac_l2
            + ut_l2
            + tt.powf(n / p.sigma - 1.0) * u_linf
            + l2_weight * u_l2;
        let spread = n / p.sigma * (1.0 - 1.0 / (1.0 + self.cfg.alpha));
        let extra = match self.cfg.problem {
            Problem::UPower => tt.powf(-1.0 + spread) * u_lpow,
            Problem::UtPower => tt.powf(spread) * ut_lpow,
        };
        Ok(MonitorSample {
            t,
            u_l2,
            u_linf,
            u_lpow,
            ut_l2,
            ut_linf,
            ut_lpow,
            frac_l2,
            energy: 0.5 * (ut_l2 * ut_l2 + frac_sq),
            monitor,
            x_norm: prev_x.max(monitor + extra),
        })
    }
}

/// Checkpoints `c 2^e` with `c` stepping through each octave, up to and including `t_end`.
pub fn checkpoints(t_end: f64, per_octave: u32, first: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut base = 2f64.powi(first.log2().floor() as i32);
    'outer: loop {
        for j in 0..per_octave {
            let t = base * (1.0 + j as f64 / per_octave as f64);
            if t >= t_end {
                break 'outer;
            }
            if t >= first {
                out.push(t);
            }
        }
        base *= 2.0;
    }
    out.push(t_end);
    out
}

fn start(cfg: &SemilinearConfig) -> Result<(Solver<'_>, State, Field)> {
    cfg.validate()?;
    let data = gaussian_data(cfg.grid, cfg.epsilon, cfg.data_width)?;
    let spectral = Spectral::new(cfg.grid);
    let coefficients = spectral.rho.iter().map(|&r| Coefficients::at(r, &cfg.params)).collect();
    let solver = Solver { cfg, spectral, cache: WeightCache { entries: VecDeque::new(), coefficients } };
    let zero = vec![Complex64::new(0.0, 0.0); cfg.grid.len()];
    let v0 = data.spectrum().to_vec();
    let f0 = solver.forcing(&zero, &v0)?;
    Ok((solver, State { u: zero, v: v0, f: f0 }, data))
}

/// `(u, u_t)` at `t_end` after `steps` equal steps, without error control.
pub fn fixed_step_solution(cfg: &SemilinearConfig, steps: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if steps == 0 {
        return Err(LabError::Usage("need at least one step".into()));
    }
    let (mut solver, mut state, _) = start(cfg)?;
    let h = cfg.t_end / steps as f64;
    for _ in 0..steps {
        state = solver.step(&state, h)?;
    }
    Ok(solver.spectral.to_physical_pair(&state.u, &state.v))
}

pub fn run(cfg: &SemilinearConfig) -> Result<RunRecord> {
    let (mut solver, mut state, data) = start(cfg)?;
    let exploratory = !cfg.within_hypotheses();
    let data_scale = solver.spectral.l2(&state.v);
    let threshold = cfg.blowup_factor * data.lp_norm(Lebesgue::INFINITY);

    let marks = checkpoints(cfg.t_end, cfg.checkpoints_per_octave, cfg.dt.min(1.0));
    let mut samples: Vec<MonitorSample> = Vec::with_capacity(marks.len());
    let (mut t, mut h) = (0.0f64, cfg.dt);
    let (mut accepted, mut rejected, mut streak) = (0usize, 0usize, 0u32);
    let mut blowup: Option<BlowUpReason> = None;
    let mut running_x = 0.0;
    let mut next = 0usize;

    'march: while next < marks.len() {
        let target = marks[next];
        let span = h.min(target - t);
        let coarse = solver.step(&state, span);
        let fine = solver.step(&state, 0.5 * span).and_then(|mid| solver.step(&mid, 0.5 * span));
        let verdict = match (coarse, fine) {
            (Ok(c), Ok(f)) if Solver::finite(&c) && Solver::finite(&f) => {
                let e = solver.error(&c, &f, data_scale);
                if e.is_finite() {
                    Some((e, f))
                } else {
                    None
                }
            }
            (Err(LabError::Io(e)), _) | (_, Err(LabError::Io(e))) => return Err(LabError::Io(e)),
            _ => None,
        };
        let (err, fine) = match verdict {
            Some((e, f)) if e <= 1.0 => (e, f),
            other => {
                rejected += 1;
                streak += 1;
                if streak > cfg.max_halvings {
                    blowup = Some(if other.is_none() { BlowUpReason::NonFinite } else { BlowUpReason::StepExhaustion });
                    break 'march;
                }
                h = 0.5 * span;
                continue;
            }
        };
        accepted += 1;
        streak = 0;
        let landed = span == target - t;
        t = if landed { target } else { t + span };
        state = fine;
        let peak = {
            let (u, v) = solver.spectral.to_physical_pair(&state.u, &state.v);
            lp_norm_of(&u, 1.0, Lebesgue::INFINITY).max(lp_norm_of(&v, 1.0, Lebesgue::INFINITY))
        };
        if peak > threshold {
            blowup = Some(BlowUpReason::Threshold);
        }
        if landed || blowup.is_some() {
            let s = solver.sample(t, &state, running_x)?;
            running_x = s.x_norm;
            samples.push(s);
            if landed {
                next += 1;
            }
        }
        if blowup.is_some() {
            break;
        }
        if span == h && err < 0.1 {
            h = (2.0 * h).min(cfg.dt_max);
        }
    }

    let predicted_slope = cfg.predicted_slope();
    if let Some(reason) = blowup {
        return Ok(RunRecord {
            exploratory,
            classification: Classification::BlowUp,
            t_blowup: Some(t),
            blowup_reason: Some(reason),
            late_fit: None,
            predicted_slope,
            monitor_growth: None,
            accepted_steps: accepted,
            rejected_steps: rejected,
            samples,
        });
    }
    let late_start = cfg.late_fraction * cfg.t_end;
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let linf: Vec<f64> = samples.iter().map(|s| s.u_linf).collect();
    let late_fit = fit_rate(&times, &linf, (late_start, cfg.t_end), FitModel::Power).ok();
    let before = samples.iter().filter(|s| s.t < late_start).map(|s| s.x_norm).fold(0.0, f64::max);
    let last = samples.last().map_or(0.0, |s| s.x_norm);
    let monitor_growth = if before > 0.0 { Some(last / before) } else { None };
    let bounded = monitor_growth.is_some_and(|g| g <= cfg.growth_factor);
    let slope_ok = late_fit.is_some_and(|f| f.slope <= predicted_slope + cfg.slope_tolerance);
    let classification = match (bounded, slope_ok) {
        _ if data_scale == 0.0 => Classification::Decaying,
        (true, true) => Classification::Decaying,
        (true, false) => Classification::Bounded,
        (false, _) => Classification::Inconclusive,
    };
    Ok(RunRecord {
        exploratory,
        classification,
        t_blowup: None,
        blowup_reason: None,
        late_fit,
        predicted_slope,
        monitor_growth,
        accepted_steps: accepted,
        rejected_steps: rejected,
        samples,
    })
}

/// One cell of an `(α, ε)` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub epsilon: f64,
    pub classification: Classification,
    pub t_blowup: Option<f64>,
    pub late_slope: Option<f64>,
    pub predicted_slope: f64,
}

/// Empirical threshold for one amplitude: largest blow-up power below the smallest decaying one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub epsilon: f64,
    pub blowup_below: Option<f64>,
    pub decaying_above: Option<f64>,
    /// Critical power from the exponent calculus for this problem.
    pub predicted_critical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub brackets: Vec<Bracket>,
}

pub fn sweep(base: &SemilinearConfig, alphas: &[f64], epsilons: &[f64], workers: usize) -> Result<SweepResult> {
    if alphas.is_empty() || epsilons.is_empty() {
        return Err(LabError::Usage("sweep needs at least one alpha and one epsilon".into()));
    }
    let cells: Vec<(f64, f64)> = epsilons.iter().flat_map(|&e| alphas.iter().map(move |&a| (a, e))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LabError::Config(e.to_string()))?;
    let rows: Result<Vec<SweepRow>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(alpha, epsilon)| {
                let cfg = SemilinearConfig { alpha, epsilon, ..base.clone() };
                match run(&cfg) {
                    Ok(rec) => Ok(SweepRow {
                        alpha,
                        epsilon,
                        classification: rec.classification,
                        t_blowup: rec.t_blowup,
                        late_slope: rec.late_fit.map(|f| f.slope),
                        predicted_slope: rec.predicted_slope,
                    }),
                    Err(e @ (LabError::Config(_) | LabError::Usage(_))) => Err(e),
                    Err(e) => {
                        log::warn!("sweep cell alpha={alpha} epsilon={epsilon} failed: {e}");
                        Ok(SweepRow {
                            alpha,
                            epsilon,
                            classification: Classification::Failed,
                            t_blowup: None,
                            late_slope: None,
                            predicted_slope: cfg.predicted_slope(),
                        })
                    }
                }
            })
            .collect()
    });
    let rows = rows?;
    let p = &base.params;
    let predicted_critical = match base.problem {
        Problem::UPower => alpha0(p.sigma, p.n),
        Problem::UtPower => alpha1(p.sigma, p.n),
    };
    let brackets = epsilons
        .iter()
        .map(|&eps| {
            let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.epsilon == eps).collect();
            let decaying_above = mine
                .iter()
                .filter(|r| r.classification == Classification::Decaying)
                .map(|r| r.alpha)
                .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.min(a))));
            let blowup_below = mine
                .iter()
                .filter(|r| r.classification == Classification::BlowUp)
                .filter(|r| decaying_above.is_none_or(|d| r.alpha < d))
                .map(|r| r.alpha)
                .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));
            Bracket { epsilon: eps, blowup_below, decaying_above, predicted_critical }
        })
        .collect();
    Ok(SweepResult { rows, brackets })
}
