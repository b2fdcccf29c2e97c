//! CSV and JSON writers for run artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sigma_core::exponents::Branch;
use sigma_core::fit::RateFit;

use crate::error::Result;
use crate::linear::DecaySeries;
use crate::semilinear::{MonitorSample, SweepRow};

/// Output directory; created on first use.
#[derive(Debug, Clone)]
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<OutDir> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(OutDir { root })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.path(name);
        write_json(&path, value)?;
        Ok(path)
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// One row of a long-format norm series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow<'a> {
    pub t: f64,
    pub norm_name: &'a str,
    pub zone: &'a str,
    pub value: f64,
}

pub fn series_rows(series: &DecaySeries) -> Vec<SeriesRow<'_>> {
    series
        .times
        .iter()
        .zip(&series.values)
        .map(|(&t, &value)| SeriesRow { t, norm_name: &series.norm_name, zone: series.zone.as_str(), value })
        .collect()
}

/// Semilinear checkpoints flattened into long format, one row per tracked norm.
pub fn monitor_rows(samples: &[MonitorSample]) -> Vec<SeriesRow<'static>> {
    let mut rows = Vec::with_capacity(samples.len() * 10);
    for s in samples {
        let named: [(&'static str, f64); 10] = [
            ("|u|_L2", s.u_l2),
            ("|u|_Linf", s.u_linf),
            ("|u|_L(1+alpha)", s.u_lpow),
            ("|u_t|_L2", s.ut_l2),
            ("|u_t|_Linf", s.ut_linf),
            ("|u_t|_L(1+alpha)", s.ut_lpow),
            ("|(-lap)^(sigma/2) u|_L2", s.frac_l2),
            ("energy", s.energy),
            ("weighted monitor", s.monitor),
            ("solution-space norm running max", s.x_norm),
        ];
        rows.extend(named.into_iter().map(|(norm_name, value)| SeriesRow { t: s.t, norm_name, zone: "full", value }));
    }
    rows
}

pub fn write_series(path: &Path, rows: &[SeriesRow<'_>]) -> Result<()> {
    write_rows(path, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRow {
    pub slope: f64,
    pub log_coefficient: f64,
    pub r_squared: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Predicted exponent, empty when no prediction applies.
    pub predicted: Option<f64>,
    /// Which estimate produced the prediction.
    pub theorem: Option<String>,
}

impl FitRow {
    pub fn new(fit: &RateFit, predicted: Option<f64>, theorem: Option<&str>) -> FitRow {
        FitRow {
            slope: fit.slope,
            log_coefficient: fit.log_coefficient,
            r_squared: fit.r_squared,
            t_min: fit.t_min,
            t_max: fit.t_max,
            predicted,
            theorem: theorem.map(str::to_string),
        }
    }

    pub fn from_branch(fit: &RateFit, predicted: f64, branch: Branch) -> FitRow {
        FitRow::new(fit, Some(predicted), Some(branch.as_str()))
    }
}

pub fn write_fits(path: &Path, rows: &[FitRow]) -> Result<()> {
    write_rows(path, rows)
}

#[derive(Serialize)]
struct SweepCsvRow<'a> {
    alpha: f64,
    epsilon: f64,
    classification: &'a str,
    t_blowup: Option<f64>,
    late_slope: Option<f64>,
    predicted_slope: f64,
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let csv_rows: Vec<SweepCsvRow<'_>> = rows
        .iter()
        .map(|r| SweepCsvRow {
            alpha: r.alpha,
            epsilon: r.epsilon,
            classification: r.classification.as_str(),
            t_blowup: r.t_blowup,
            late_slope: r.late_slope,
            predicted_slope: r.predicted_slope,
        })
        .collect();
    write_rows(path, &csv_rows)
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semilinear::Classification;

    fn tmp(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("sigma-lab-output-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn sweep_header_and_quoting() {
        let path = tmp("sweep.csv");
        let row = SweepRow {
            alpha: 1.5,
            epsilon: 0.5,
            classification: Classification::BlowUp,
            t_blowup: Some(4.0),
            late_slope: None,
            predicted_slope: -1.0,
        };
        write_sweep(&path, &[row]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "alpha,epsilon,classification,t_blowup,late_slope,predicted_slope");
        assert_eq!(lines.next().unwrap(), "1.5,0.5,blow-up,4.0,,-1.0");
    }

    #[test]
    fn series_names_with_commas_are_quoted() {
        let path = tmp("series.csv");
        let rows = [SeriesRow { t: 1.0, norm_name: "|u|_L2, low", zone: "low", value: 2.0 }];
        write_series(&path, &rows).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "t,norm_name,zone,value\n1.0,\"|u|_L2, low\",low,2.0\n");
    }
}
