//! Run configuration: defaults, JSON config documents and `key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sigma_core::exponents::{EstimateSpec, Lebesgue, ModelParams, Problem};
use sigma_core::fit::{log_times, FitModel};
use sigma_core::symbol::{CutoffConfig, Zone};

use crate::error::{LabError, Result};
use crate::field::Grid;
use crate::linear::{NormSpec, RadialQuantity};
use crate::semilinear::SemilinearConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads for sweeps and data-parallel loops.
    pub workers: usize,
    pub out: PathBuf,
    pub model: ModelParams,
    /// Filled from the model when absent.
    pub cutoffs: Option<CutoffConfig>,
    pub predict: PredictConfig,
    pub linear: LinearConfig,
    pub semilinear: SemilinearSection,
    pub sweep: SweepConfig,
    pub selftest: SelftestConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictConfig {
    pub p: Lebesgue,
    pub q: Lebesgue,
    pub beta: u32,
    pub b: f64,
    pub ell: u32,
    /// Also emit the prediction over a `(1/p, 1/q)` lattice.
    pub table: bool,
    pub table_steps: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearExperiment {
    /// `L²` quantities of radial data by quadrature.
    Radial,
    /// Any `L^q` norm on a periodic grid.
    Grid,
    /// Exponential decay of the high-frequency zone.
    HighZone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConfig {
    pub experiment: LinearExperiment,
    /// Radial path quantity.
    pub quantity: RadialQuantity,
    /// Grid path norm.
    pub norm: NormSpec,
    /// Zone for the radial path.
    pub zone: Zone,
    pub amplitude: f64,
    pub width: f64,
    pub points: usize,
    pub length: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    /// Defaults to `[t_min, t_max]`.
    pub fit_window: Option<(f64, f64)>,
    pub fit_model: FitModel,
    /// Grid results are trusted up to `c_valid (L/2π)^{2θ}`.
    pub c_valid: f64,
    pub rtol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemilinearSection {
    pub problem: Problem,
    pub alpha: f64,
    pub epsilon: f64,
    pub data_width: f64,
    pub points: usize,
    pub length: f64,
    pub t_end: f64,
    pub dt: f64,
    pub dt_max: f64,
    pub rtol: f64,
    pub atol: f64,
    pub blowup_factor: f64,
    pub max_halvings: u32,
    pub late_fraction: f64,
    pub slope_tolerance: f64,
    pub growth_factor: f64,
    pub checkpoints_per_octave: u32,
    pub strict_hypotheses: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestConfig {
    /// Random points per randomized check.
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let model = ModelParams { sigma: 2.0, theta: 2.0, n: 3 };
        let proto = SemilinearConfig::new(
            model,
            Problem::UPower,
            3.0,
            1e-3,
            Grid { dim: 3, points: 64, length: 64.0 },
        );
        RunConfig {
            seed: 0,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            out: PathBuf::from("out"),
            model,
            cutoffs: None,
            predict: PredictConfig {
                p: Lebesgue::ONE,
                q: Lebesgue::INFINITY,
                beta: 0,
                b: 0.0,
                ell: 0,
                table: false,
                table_steps: 8,
            },
            linear: LinearConfig {
                experiment: LinearExperiment::Radial,
                quantity: RadialQuantity::Energy,
                norm: NormSpec::plain(Lebesgue::INFINITY),
                zone: Zone::Full,
                amplitude: 1.0,
                width: 1.0,
                points: 256,
                length: 400.0,
                t_min: 1e2,
                t_max: 1e5,
                samples: 24,
                fit_window: None,
                fit_model: FitModel::Power,
                c_valid: 0.01,
                rtol: 1e-10,
            },
            semilinear: SemilinearSection {
                problem: proto.problem,
                alpha: proto.alpha,
                epsilon: proto.epsilon,
                data_width: proto.data_width,
                points: proto.grid.points,
                length: proto.grid.length,
                t_end: proto.t_end,
                dt: proto.dt,
                dt_max: proto.dt_max,
                rtol: proto.rtol,
                atol: proto.atol,
                blowup_factor: proto.blowup_factor,
                max_halvings: proto.max_halvings,
                late_fraction: proto.late_fraction,
                slope_tolerance: proto.slope_tolerance,
                growth_factor: proto.growth_factor,
                checkpoints_per_octave: proto.checkpoints_per_octave,
                strict_hypotheses: proto.strict_hypotheses,
            },
            sweep: SweepConfig { alphas: vec![1.0, 1.5, 2.5, 3.0], epsilons: vec![0.3] },
            selftest: SelftestConfig { samples: 1000 },
        }
    }
}

/// Recursively overlays `patch` onto `base`; objects merge, everything else replaces.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p,
    }
}

/// Applies one `dotted.key=value` override; the value is read as JSON, else as a string.
pub fn apply_override(tree: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| LabError::Usage(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(LabError::Usage(format!("override `{assignment}` has an empty key")));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = tree;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        if !node.is_object() {
            *node = Value::Object(Map::new());
        }
        node = node.as_object_mut().expect("object").entry(*part).or_insert(Value::Object(Map::new()));
    }
    if !node.is_object() {
        *node = Value::Object(Map::new());
    }
    node.as_object_mut().expect("object").insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Defaults, then the optional document, then overrides, then defaults made explicit.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
        let mut tree = serde_json::to_value(RunConfig::default())?;
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| LabError::Config(format!("cannot read {}: {e}", p.display())))?;
            let doc: Value = serde_json::from_str(&text)
                .map_err(|e| LabError::Config(format!("{}: {e}", p.display())))?;
            if !doc.is_object() {
                return Err(LabError::Config(format!("{}: top level must be an object", p.display())));
            }
            merge(&mut tree, doc);
        }
        for o in overrides {
            apply_override(&mut tree, o)?;
        }
        let cfg: RunConfig = serde_json::from_value(tree).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.resolve()
    }

    fn resolve(mut self) -> Result<RunConfig> {
        self.model.validate()?;
        let cut = match self.cutoffs {
            Some(c) => CutoffConfig::new(c.eps0, c.n_inf, &self.model)?,
            None => CutoffConfig::default_for(&self.model),
        };
        self.cutoffs = Some(cut);
        if self.linear.fit_window.is_none() {
            self.linear.fit_window = Some((self.linear.t_min, self.linear.t_max));
        }
        if self.workers == 0 {
            return Err(LabError::Config("workers must be positive".into()));
        }
        Ok(self)
    }

    pub fn cutoffs(&self) -> CutoffConfig {
        self.cutoffs.unwrap_or_else(|| CutoffConfig::default_for(&self.model))
    }

    pub fn estimate(&self) -> Result<EstimateSpec> {
        let p = &self.predict;
        Ok(EstimateSpec::new(p.p, p.q, p.beta, p.b, p.ell)?)
    }

    pub fn linear_times(&self) -> Result<Vec<f64>> {
        let l = &self.linear;
        if !(l.t_min > 0.0 && l.t_max > l.t_min && l.samples >= 2) {
            return Err(LabError::Config("linear times need 0 < t_min < t_max and samples >= 2".into()));
        }
        Ok(log_times(l.t_min, l.t_max, l.samples))
    }

    pub fn linear_grid(&self) -> Result<Grid> {
        Grid::new(self.model.n as usize, self.linear.points, self.linear.length)
    }

    pub fn semilinear_config(&self) -> Result<SemilinearConfig> {
        let s = &self.semilinear;
        let grid = Grid::new(self.model.n as usize, s.points, s.length)?;
        let cfg = SemilinearConfig {
            params: self.model,
            problem: s.problem,
            alpha: s.alpha,
            epsilon: s.epsilon,
            data_width: s.data_width,
            grid,
            t_end: s.t_end,
            dt: s.dt,
            dt_max: s.dt_max,
            rtol: s.rtol,
            atol: s.atol,
            blowup_factor: s.blowup_factor,
            max_halvings: s.max_halvings,
            late_fraction: s.late_fraction,
            slope_tolerance: s.slope_tolerance,
            growth_factor: s.growth_factor,
            checkpoints_per_octave: s.checkpoints_per_octave,
            strict_hypotheses: s.strict_hypotheses,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
