//! Subcommand implementations shared by the binary and the integration tests.

use serde::Serialize;
use sigma_core::exponents::{
    pair_condition, derivative_condition, lattice_table, predict_low_rate, Condition, EstimateSpec, Lebesgue, RatePrediction,
};
use sigma_core::fit::RateFit;
use sigma_core::quadrature::QuadOptions;
use sigma_core::radial::RadialProfile;
use sigma_core::symbol::Zone;

use crate::config::{LinearExperiment, RunConfig};
use crate::error::{LabError, Result};
use crate::field::gaussian_data;
use crate::linear::{decay_series_grid, decay_series_radial, high_freq_decay, DecaySeries, RadialQuantity};
use crate::output::{monitor_rows, series_rows, write_fits, write_series, write_sweep, FitRow, OutDir};
use crate::selftest::run_selftest;
use crate::semilinear::{run, sweep, Bracket, RunRecord, SemilinearConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Predict,
    LinearDecay,
    Semilinear,
    Sweep,
    Selftest,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Predict => "predict",
            Command::LinearDecay => "linear-decay",
            Command::Semilinear => "semilinear",
            Command::Sweep => "sweep",
            Command::Selftest => "selftest",
        }
    }
}

/// Writes the resolved configuration, runs the command and returns a one-paragraph summary.
pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<String> {
    let out = OutDir::create(&cfg.out)?;
    out.json("resolved-config.json", cfg)?;
    match cmd {
        Command::Predict => predict(cfg, &out),
        Command::LinearDecay => linear_decay(cfg, &out),
        Command::Semilinear => semilinear(cfg, &out),
        Command::Sweep => run_sweep(cfg, &out),
        Command::Selftest => selftest(cfg, &out),
    }
}

#[derive(Serialize)]
struct LatticeCsvRow {
    inv_p: f64,
    inv_q: f64,
    condition_value: f64,
    condition: &'static str,
    exponent: f64,
    log_loss: bool,
    theorem: &'static str,
    covered: bool,
}

fn tag_name(c: &Condition) -> &'static str {
    match c.tag {
        sigma_core::exponents::ConditionTag::Strict => "strict",
        sigma_core::exponents::ConditionTag::Equality => "equality",
        sigma_core::exponents::ConditionTag::Violated => "violated",
    }
}

#[derive(Serialize)]
struct PredictReport {
    prediction: RatePrediction,
    /// Admissibility of the `(p, q)` pair for the split low-frequency estimate.
    pair_condition: Condition,
    /// Same with derivative and smoothing orders included.
    derivative_condition: Condition,
}

fn predict(cfg: &RunConfig, out: &OutDir) -> Result<String> {
    let spec = cfg.estimate()?;
    let prediction = predict_low_rate(&spec, &cfg.model)?;
    let report = PredictReport {
        prediction,
        pair_condition: pair_condition(&spec, &cfg.model)?,
        derivative_condition: derivative_condition(&spec, &cfg.model)?,
    };
    out.json("prediction.json", &report)?;
    if cfg.predict.table {
        let rows = lattice_table(&cfg.model, cfg.predict.table_steps, spec.beta, spec.b, spec.ell)?;
        let csv_rows: Vec<LatticeCsvRow> = rows
            .iter()
            .map(|r| LatticeCsvRow {
                inv_p: r.inv_p,
                inv_q: r.inv_q,
                condition_value: r.condition.value,
                condition: tag_name(&r.condition),
                exponent: r.prediction.exponent,
                log_loss: r.prediction.log_loss,
                theorem: r.prediction.theorem.as_str(),
                covered: r.prediction.covered,
            })
            .collect();
        let mut w = csv::Writer::from_path(out.path("prediction-table.csv"))?;
        for r in &csv_rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(serde_json::to_string(&prediction)?)
}

/// Prediction for a radial `L²` quantity of `L¹` data, or none for exponentially decaying zones.
fn radial_prediction(cfg: &RunConfig, quantity: RadialQuantity, zone: Zone) -> Result<Option<RatePrediction>> {
    if matches!(zone, Zone::Mid | Zone::High) {
        return Ok(None);
    }
    let sigma = cfg.model.sigma;
    let parts: Vec<(f64, u32)> = match quantity {
        RadialQuantity::Energy => vec![(sigma, 0), (0.0, 1)],
        RadialQuantity::Kernel { b, ell } => vec![(b, ell)],
    };
    let mut best: Option<RatePrediction> = None;
    for (b, ell) in parts {
        let spec = EstimateSpec::new(Lebesgue::ONE, Lebesgue::TWO, 0, b, ell)?;
        let p = predict_low_rate(&spec, &cfg.model)?;
        if best.as_ref().is_none_or(|q| p.exponent > q.exponent) {
            best = Some(p);
        }
    }
    Ok(best)
}

fn fit_row(fit: &RateFit, prediction: Option<&RatePrediction>) -> FitRow {
    match prediction {
        Some(p) => FitRow::from_branch(fit, p.exponent, p.theorem),
        None => FitRow::new(fit, None, None),
    }
}

fn linear_decay(cfg: &RunConfig, out: &OutDir) -> Result<String> {
    let l = &cfg.linear;
    let times = cfg.linear_times()?;
    let cutoffs = cfg.cutoffs();
    let window = l.fit_window.unwrap_or((l.t_min, l.t_max));
    let opts = QuadOptions { rtol: l.rtol, ..QuadOptions::default() };
    let (series, row): (DecaySeries, FitRow) = match l.experiment {
        LinearExperiment::Radial => {
            let profile = RadialProfile::gaussian(l.amplitude, l.width)?;
            let series = decay_series_radial(&profile, &times, l.quantity, l.zone, &cfg.model, &cutoffs, &opts)?;
            let fit = series.fit(window, l.fit_model)?;
            let pred = radial_prediction(cfg, l.quantity, l.zone)?;
            (series, fit_row(&fit, pred.as_ref()))
        }
        LinearExperiment::Grid => {
            let grid = cfg.linear_grid()?;
            let data = gaussian_data(grid, l.amplitude, l.width)?;
            let series = decay_series_grid(&data, &times, &l.norm, &cfg.model, &cutoffs, l.c_valid)?;
            let fit = series.fit(window, l.fit_model)?;
            let beta: u32 = l.norm.beta.iter().sum();
            let pred = if matches!(l.norm.zone, Zone::Full | Zone::Low) {
                let spec = EstimateSpec::new(Lebesgue::ONE, l.norm.q, beta, l.norm.b, l.norm.ell)?;
                Some(predict_low_rate(&spec, &cfg.model)?)
            } else {
                None
            };
            (series, fit_row(&fit, pred.as_ref()))
        }
        LinearExperiment::HighZone => {
            let profile = RadialProfile::gaussian(l.amplitude, l.width)?;
            let report = high_freq_decay(&profile, &times, &cfg.model, &cutoffs, &opts)?;
            out.json("high-zone.json", &report)?;
            // Exponential fits reuse the columns: slope is -c, prediction is minus the symbol floor.
            let row = FitRow {
                slope: -report.rate,
                log_coefficient: 0.0,
                r_squared: report.r_squared,
                t_min: times[0],
                t_max: times[times.len() - 1],
                predicted: Some(-report.floor),
                theorem: Some("high-zone-exponential".into()),
            };
            (report.series, row)
        }
    };
    write_series(&out.path("series.csv"), &series_rows(&series))?;
    write_fits(&out.path("fits.csv"), std::slice::from_ref(&row))?;
    Ok(format!(
        "{}: slope {:.4} (r² {:.4}), predicted {}",
        series.norm_name,
        row.slope,
        row.r_squared,
        row.predicted.map_or("none".to_string(), |p| format!("{p:.4}"))
    ))
}

#[derive(Serialize)]
struct RecordSummary<'a> {
    config: &'a SemilinearConfig,
    #[serde(flatten)]
    record: RecordMeta<'a>,
}

/// A run record without its checkpoint series.
#[derive(Serialize)]
struct RecordMeta<'a> {
    exploratory: bool,
    classification: &'static str,
    t_blowup: Option<f64>,
    blowup_reason: Option<crate::semilinear::BlowUpReason>,
    late_fit: Option<&'a RateFit>,
    predicted_slope: f64,
    monitor_growth: Option<f64>,
    accepted_steps: usize,
    rejected_steps: usize,
    checkpoints: usize,
}

impl<'a> RecordMeta<'a> {
    fn of(r: &'a RunRecord) -> Self {
        RecordMeta {
            exploratory: r.exploratory,
            classification: r.classification.as_str(),
            t_blowup: r.t_blowup,
            blowup_reason: r.blowup_reason,
            late_fit: r.late_fit.as_ref(),
            predicted_slope: r.predicted_slope,
            monitor_growth: r.monitor_growth,
            accepted_steps: r.accepted_steps,
            rejected_steps: r.rejected_steps,
            checkpoints: r.samples.len(),
        }
    }
}

fn semilinear(cfg: &RunConfig, out: &OutDir) -> Result<String> {
    let sc = cfg.semilinear_config()?;
    let rec = run(&sc)?;
    out.json("record.json", &RecordSummary { config: &sc, record: RecordMeta::of(&rec) })?;
    write_series(&out.path("series.csv"), &monitor_rows(&rec.samples))?;
    let mut msg = format!("classification {}", rec.classification.as_str());
    if let Some(t) = rec.t_blowup {
        msg.push_str(&format!(", t_blowup {t}"));
    }
    if let Some(f) = &rec.late_fit {
        msg.push_str(&format!(", late slope {:.4} (predicted {:.4})", f.slope, rec.predicted_slope));
    }
    if rec.exploratory {
        msg.push_str(", exploratory regime");
    }
    Ok(msg)
}

fn run_sweep(cfg: &RunConfig, out: &OutDir) -> Result<String> {
    let base = cfg.semilinear_config()?;
    let result = sweep(&base, &cfg.sweep.alphas, &cfg.sweep.epsilons, cfg.workers)?;
    write_sweep(&out.path("sweep.csv"), &result.rows)?;
    out.json("brackets.json", &result.brackets)?;
    let describe = |b: &Bracket| {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |x| x.to_string());
        format!(
            "epsilon {}: blow-up at {} / decaying at {} (predicted {:.4})",
            b.epsilon,
            show(b.blowup_below),
            show(b.decaying_above),
            b.predicted_critical
        )
    };
    Ok(result.brackets.iter().map(describe).collect::<Vec<_>>().join("\n"))
}

fn selftest(cfg: &RunConfig, out: &OutDir) -> Result<String> {
    let report = run_selftest(cfg.seed, cfg.selftest.samples)?;
    out.json("selftest.json", &report)?;
    let lines: Vec<String> = report
        .checks
        .iter()
        .map(|c| {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            format!("{verdict} {}: {:.3e} (limit {:.1e})", c.name, c.measured, c.tolerance)
        })
        .collect();
    let text = lines.join("\n");
    if report.passed() {
        Ok(text)
    } else {
        Err(LabError::Numerical(format!("selftest failed\n{text}")))
    }
}
