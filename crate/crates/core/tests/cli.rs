use std::path::Path;
use std::process::{Command, Output};

use msclimate::cli::RunManifest;
use serde_json::Value;

fn msclimate(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msclimate"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_ms_cycle_period() {
    let dir = tempfile::tempdir().unwrap();
    let o = msclimate(dir.path(), &["simulate", "--model", "ms", "--p", "1.0", "--q", "1.2", "--r", "0.8", "--s", "0.8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&dir.path().join("summary.json"));
    let period = summary["cycle"]["period"].as_f64().unwrap();
    assert!((period - 10.0).abs() < 1.5, "{period}");
    assert_eq!(summary["cycle"]["stability"], "stable");
    let manifest = RunManifest::read(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(manifest.subcommand, "simulate");
    assert_eq!(manifest.seed, Some(0));
    for f in ["orbit.csv", "orbit.json", "summary.json"] {
        assert!(manifest.outputs.iter().any(|o| o == f));
    }
    let csv = std::fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
    assert!(csv.starts_with("# msclimate orbit v1"));
}

#[test]
fn simulate_sym_decays_to_origin() {
    let dir = tempfile::tempdir().unwrap();
    let o = msclimate(dir.path(), &["simulate", "--model", "sym", "--p", "2", "--r", "0.5", "--x0", "0.1", "--y0", "0.1", "--svg"]);
    assert!(o.status.success());
    let last = &json(&dir.path().join("summary.json"))["final_state"];
    assert!(last[0].as_f64().unwrap().abs() < 1e-8 && last[1].as_f64().unwrap().abs() < 1e-8);
    assert!(dir.path().join("orbit.svg").exists());
}

#[test]
fn invalid_parameters_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = msclimate(dir.path(), &["simulate", "--model", "ms", "--p", "1.0", "--q", "0.5", "--r", "0.8", "--s", "0.8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("q > 1"));
    let o = msclimate(dir.path(), &["simulate", "--model", "sym", "--p", "1.0", "--r", "0.5", "--x0", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = msclimate(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_reports() {
    let dir = tempfile::tempdir().unwrap();
    let stable = |v: &Value| -> Vec<String> {
        v["stable"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect()
    };
    assert!(msclimate(dir.path(), &["analyze", "--model", "sym", "--p", "0.5", "--r", "0.8"]).status.success());
    let a = json(&dir.path().join("analysis.json"));
    assert_eq!(a["region"], "III");
    assert_eq!(stable(&a), ["P1", "P2"]);

    assert!(msclimate(dir.path(), &["analyze", "--model", "asym", "--p", "1.55", "--r", "1.45", "--s", "0.8"]).status.success());
    let a = json(&dir.path().join("analysis.json"));
    assert_eq!(a["equilibria"].as_array().unwrap().len(), 3);
    assert!(stable(&a).is_empty());

    assert!(msclimate(dir.path(), &["analyze", "--model", "sym", "--p", "1", "--r", "1"]).status.success());
    let a = json(&dir.path().join("analysis.json"));
    assert_eq!(a["organizing_center"], true);
    assert!(a["region"].is_null());
}

#[test]
fn melnikov_tasks() {
    let dir = tempfile::tempdir().unwrap();
    assert!(msclimate(dir.path(), &["melnikov", "fold"]).status.success());
    let f = json(&dir.path().join("fold.json"));
    assert!((f["x_star"].as_f64().unwrap() - 1.471).abs() < 5e-3);
    assert!((f["lambda_star"].as_f64().unwrap() - 0.752).abs() < 2e-3);

    assert!(msclimate(dir.path(), &["melnikov", "rcurve", "--from", "1.01", "--to", "2.0"]).status.success());
    let csv = std::fs::read_to_string(dir.path().join("rcurve.csv")).unwrap();
    let loop_row = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('x'))
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .find(|v| v[0] == std::f64::consts::SQRT_2)
        .expect("row at the homoclinic loop");
    assert!((loop_row[3] - 0.8).abs() < 1e-9);

    assert!(msclimate(dir.path(), &["melnikov", "census", "--lambda", "0.9"]).status.success());
    let c = json(&dir.path().join("census.json"));
    assert_eq!((c["stable_outer"].as_u64(), c["unstable_inner"].as_u64()), (Some(1), Some(2)));
}

#[test]
fn sweep_is_deterministic_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["sweep", "--model", "ms", "--q", "1.2", "--s", "0.8", "--n", "6", "--seed", "7", "--svg"];
    assert!(msclimate(&a, &args).status.success());
    assert!(msclimate(&b, &args).status.success());
    for f in ["sweep.csv", "sweep.msxb", "sweep.svg"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let grid = msclimate::bifurcation::SweepGrid::from_binary(&std::fs::read(a.join("sweep.msxb")).unwrap()).unwrap();
    assert_eq!((grid.p_axis.n, grid.r_axis.n, grid.seed), (6, 6, 7));

    let replay = dir.path().join("replay");
    let o = Command::new(env!("CARGO_BIN_EXE_msclimate"))
        .arg("replay")
        .arg(a.join("manifest.json"))
        .arg("--out")
        .arg(&replay)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let report = serde_json::Deserializer::from_slice(&o.stdout)
        .into_iter::<Value>()
        .last()
        .unwrap()
        .unwrap();
    assert_eq!(report["identical"], true);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_msclimate"))
        .args(["melnikov", "fold"])
        .env(msclimate::cli::OUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("fold.json").exists() && dir.path().join("manifest.json").exists());
}

#[test]
fn trace_homoclinic_slope() {
    let dir = tempfile::tempdir().unwrap();
    let o = msclimate(dir.path(), &["trace", "--variant", "sym", "--kind", "homoclinic", "--p-from", "0.99", "--p-to", "0.995", "--svg"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("summary.json"));
    let k = s[0]["tangent_slope_at_1_1"].as_f64().unwrap();
    assert!((k + 4.0).abs() < 0.1, "{k}");
    let csv = std::fs::read_to_string(dir.path().join("curve-homoclinic-P1.csv")).unwrap();
    assert!(csv.starts_with("# msclimate curve v1"));
    assert!(dir.path().join("curves.svg").exists());
}
