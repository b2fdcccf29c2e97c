use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_sigma-lab");

/// Small 1-D semilinear setup that finishes in well under a second.
const SMALL_1D: &[&str] = &[
    "model.sigma=0.5",
    "model.theta=0.4",
    "model.n=1",
    "semilinear.points=1024",
    "semilinear.length=1024",
    "semilinear.data_width=5",
    "semilinear.t_end=20",
    "semilinear.dt=0.25",
    "semilinear.dt_max=2",
];

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sigma-lab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn lab(cmd: &str, out: &Path, sets: &[&str], extra: &[&str]) -> Output {
    let mut c = Command::new(BIN);
    c.arg(cmd).arg("--out").arg(out);
    for s in sets {
        c.arg("--set").arg(s);
    }
    c.args(extra).output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn predict_prints_rate_record() {
    let out = scratch("predict");
    let o = lab("predict", &out, &["predict.q=2", "predict.b=2"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    let keys: Vec<&str> = printed.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys.len(), 5);
    for k in ["exponent", "log_loss", "theorem", "covered", "non_optimal"] {
        assert!(keys.contains(&k), "missing {k}");
    }
    assert_eq!(printed["exponent"].as_f64(), Some(-0.375));
    assert_eq!(printed["theorem"], "diffusive-no-log");
    let record = read_json(&out.join("prediction.json"));
    assert_eq!(record["prediction"], printed);
    assert_eq!(record["pair_condition"]["tag"], "strict");
    assert!(out.join("resolved-config.json").exists());
}

#[test]
fn prediction_table_has_lattice_rows() {
    let out = scratch("table");
    let o = lab("predict", &out, &["predict.table=true", "predict.table_steps=4"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out.join("prediction-table.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "inv_p,inv_q,condition_value,condition,exponent,log_loss,theorem,covered"
    );
    // 0 <= 1/q <= 1/p <= 1 on a 5 x 5 lattice.
    assert_eq!(lines.count(), 15);
}

#[test]
fn usage_and_config_errors_exit_two() {
    let out = scratch("errors");
    let cases: [(&str, Vec<&str>, Vec<&str>); 5] = [
        ("sweep", vec!["sweep.alphas=[]"], vec![]),
        ("predict", vec!["model.theta=0.9"], vec![]),
        ("predict", vec!["bogus.key=1"], vec![]),
        ("predict", vec!["workers=0"], vec![]),
        ("predict", vec![], vec!["--config", "/nonexistent/config.json"]),
    ];
    for (cmd, sets, extra) in cases {
        let o = lab(cmd, &out, &sets, &extra);
        assert_eq!(o.status.code(), Some(2), "{cmd} {sets:?} {extra:?}");
    }
    let o = Command::new(BIN).arg("no-such-command").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn strict_mode_rejects_runs_outside_hypotheses() {
    let out = scratch("strict");
    let mut sets = SMALL_1D.to_vec();
    sets.push("semilinear.problem=ut-power");
    let o = lab("semilinear", &out, &sets, &[]);
    assert_eq!(o.status.code(), Some(2));
    sets.push("semilinear.strict_hypotheses=false");
    let o = lab("semilinear", &out, &sets, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_json(&out.join("record.json"))["exploratory"], true);
}

#[test]
fn semilinear_writes_record_series_and_config() {
    let out = scratch("semilinear");
    let o = lab("semilinear", &out, SMALL_1D, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(header(&out.join("series.csv")), "t,norm_name,zone,value");
    let record = read_json(&out.join("record.json"));
    assert!(record["classification"].is_string());
    let resolved = read_json(&out.join("resolved-config.json"));
    assert_eq!(resolved["semilinear"]["points"], 1024);
    assert_eq!(resolved["model"]["sigma"].as_f64(), Some(0.5));
}

#[test]
fn sweep_table_columns() {
    let out = scratch("sweep");
    let mut sets = SMALL_1D.to_vec();
    sets.extend(["sweep.alphas=[1.5,3]", "sweep.epsilons=[0.5]"]);
    let o = lab("sweep", &out, &sets, &["--workers", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let path = out.join("sweep.csv");
    assert_eq!(header(&path), "alpha,epsilon,classification,t_blowup,late_slope,predicted_slope");
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("1.5,0.5,blow-up,"));
    assert!(read_json(&out.join("brackets.json")).is_array());
}

#[test]
fn linear_decay_fits_carry_prediction() {
    let out = scratch("linear");
    let o = lab("linear-decay", &out, &["linear.samples=12", "linear.t_max=1e3"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let path = out.join("fits.csv");
    assert_eq!(header(&path), "slope,log_coefficient,r_squared,t_min,t_max,predicted,theorem");
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let row = reader.records().next().unwrap().unwrap();
    let slope: f64 = row[0].parse().unwrap();
    let predicted: f64 = row[5].parse().unwrap();
    assert_eq!(&row[6], "diffusive-no-log");
    assert!((slope - predicted).abs() < 0.05, "{slope} vs {predicted}");
    assert_eq!(header(&out.join("series.csv")), "t,norm_name,zone,value");
}

#[test]
fn selftest_passes() {
    let out = scratch("selftest");
    let o = lab("selftest", &out, &["selftest.samples=200"], &["--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_json(&out.join("selftest.json"));
    assert_eq!(report["seed"], 7);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let first = scratch("det-a");
    let second = scratch("det-b");
    let mut sets = SMALL_1D.to_vec();
    sets.extend(["sweep.alphas=[1.5,3]", "sweep.epsilons=[1e-3,0.5]"]);
    assert_eq!(lab("sweep", &first, &sets, &["--workers", "2"]).status.code(), Some(0));
    // Replaying the emitted config must reproduce every file except the output path itself.
    let replay = first.join("resolved-config.json");
    let o = lab("sweep", &second, &[], &["--config", replay.to_str().unwrap(), "--workers", "1"]);
    assert_eq!(o.status.code(), Some(0));
    for name in ["sweep.csv", "brackets.json"] {
        let a = std::fs::read(first.join(name)).unwrap();
        let b = std::fs::read(second.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
    for cmd in ["semilinear", "selftest"] {
        let a = scratch(&format!("det-{cmd}-a"));
        let b = scratch(&format!("det-{cmd}-b"));
        let sets: &[&str] = if cmd == "semilinear" { SMALL_1D } else { &["selftest.samples=100"] };
        assert_eq!(lab(cmd, &a, sets, &["--seed", "3"]).status.code(), Some(0));
        assert_eq!(lab(cmd, &b, sets, &["--seed", "3"]).status.code(), Some(0));
        for entry in std::fs::read_dir(&a).unwrap() {
            let name = entry.unwrap().file_name();
            if name == "resolved-config.json" {
                continue;
            }
            assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap(), "{name:?}");
        }
    }
}
