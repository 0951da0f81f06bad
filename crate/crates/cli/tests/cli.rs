use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn liftcal(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liftcal")).current_dir(dir).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exact_fit_calibration() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exact.csv"), "y,f_hat\n0.5,0.5\n1.5,1.5\n-2,-2\n3.25,3.25\n7,7\n").unwrap();
    let r = report(&liftcal(dir.path(), &["calibrate", "exact.csv"]));
    let fit = &r["results"]["fit"];
    assert!(fit["beta0_hat"].as_f64().unwrap().abs() < 1e-12);
    assert!((fit["beta1_hat"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((r["results"]["r_squared"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r["results"]["consistency_test"]["reject"], Value::Bool(false));
    assert_eq!(r["parameters"]["seed"], 0);
    assert_eq!(r["command"], "calibrate");
}

#[test]
fn rank_orders_null_before_perfect() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("models.csv"), "y,f_hat:perfect,f_hat:flat\n1,1,2.5\n2,2,2.5\n4,4,2.5\n3,3,2.5\n")
        .unwrap();
    let r = report(&liftcal(dir.path(), &["rank", "models.csv"]));
    let lcd: Vec<f64> = r["results"]["lcd"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(lcd[0].abs() < 1e-9 && (lcd[1] - 1.0).abs() < 1e-9, "{lcd:?}");
    assert_eq!(r["results"]["order"], serde_json::json!(["flat", "perfect"]));
}

#[test]
fn simulate_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = liftcal(dir.path(), &["simulate", "--n", "1000", "--seed", "7", "--out", name]);
        assert!(out.status.success());
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    let header = String::from_utf8_lossy(&a).lines().next().unwrap().to_string();
    assert_eq!(header, "x1,x2,x3,x4,x5,x6,x7,x8,x9,x10,y,truth");
    assert_eq!(String::from_utf8_lossy(&a).lines().count(), 1001);
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    liftcal(dir.path(), &["simulate", "--n", "300", "--seed", "3", "--out", "sim.csv"]);
    liftcal(dir.path(), &["simulate", "predict-baseline", "sim.csv", "--seed", "4", "--out", "pred.csv"]);
    let args = [
        "mcmc-interval",
        "pred.csv",
        "--split",
        "calib",
        "--test-split",
        "test",
        "--samples",
        "2000",
        "--burn-in",
        "500",
        "--seed",
        "9",
    ];
    let a = liftcal(dir.path(), &args);
    let b = liftcal(dir.path(), &args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(report(&a)["parameters"]["seed"], 9);
}

#[test]
fn simulate_predict_calibrate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    assert!(liftcal(dir.path(), &["simulate", "--n", "1000", "--seed", "7", "--out", "sim.csv"]).status.success());
    let out = liftcal(
        dir.path(),
        &["simulate", "predict-baseline", "sim.csv", "--model", "ols", "--seed", "1", "--out", "pred.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // all rows, then the calibration rows only
    let all = report(&liftcal(dir.path(), &["calibrate", "pred.csv"]));
    assert_eq!(all["results"]["fit"]["n_calb"], 1000);
    let cal = report(&liftcal(dir.path(), &["calibrate", "pred.csv", "--split", "calib"]));
    assert_eq!(cal["results"]["fit"]["n_calb"], 200);

    let band = report(&liftcal(
        dir.path(),
        &["interval", "pred.csv", "--split", "calib", "--test-split", "test", "--out", "band.csv"],
    ));
    assert_eq!(band["results"]["n_test"], 100);
    let csv = fs::read_to_string(dir.path().join("band.csv")).unwrap();
    assert!(csv.starts_with("row,f_hat,center,lower,upper,y,covered\n"));
    assert_eq!(csv.lines().count(), 101);

    let curve = report(&liftcal(dir.path(), &["coverage", "pred.csv", "--split", "calib", "--test-split", "test"]));
    assert_eq!(curve["results"]["levels"].as_array().unwrap().len(), 10);
}

#[test]
fn outliers_flag_injected_points() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("y,f_hat\n");
    for i in 0..64 {
        let f = f64::from(i) / 8.0;
        // deterministic small wiggle plus two gross errors
        let mut y = 1.0 + 2.0 * f + 0.1 * (f64::from(i) * 1.7).sin();
        if i == 10 || i == 40 {
            y += 6.0;
        }
        text.push_str(&format!("{y},{f}\n"));
    }
    fs::write(dir.path().join("o.csv"), text).unwrap();
    let r = report(&liftcal(dir.path(), &["outliers", "o.csv", "--out", "flags.csv"]));
    let idx: Vec<u64> =
        r["results"]["outlier_indices"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert!(idx.contains(&10) && idx.contains(&40), "{idx:?}");
    let fixed = report(&liftcal(dir.path(), &["outliers", "o.csv", "--lambda", "1e9"]));
    assert_eq!(fixed["results"]["n_outliers"], 0);
}

#[test]
fn mic_weights_and_committee() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.csv"), format!("model_id,loss,complexity\na,0,0\nb,{},0\n", 2.0 * 9f64.ln())).unwrap();
    fs::write(dir.path().join("p.csv"), "f_hat:a,f_hat:b\n1,2\n3,4\n").unwrap();
    let r = report(&liftcal(dir.path(), &["mic", "s.csv", "--predictions", "p.csv"]));
    let w = r["results"]["probabilities"].as_array().unwrap();
    assert!((w[0].as_f64().unwrap() - 0.9).abs() < 1e-12);
    let c = r["results"]["committee"].as_array().unwrap();
    assert!((c[0].as_f64().unwrap() - 1.1).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "y,f_hat\n1,2\n3,oops\n").unwrap();
    let out = liftcal(dir.path(), &["calibrate", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("row 2") && msg.contains("f_hat"), "{msg}");

    fs::write(dir.path().join("nohead.csv"), "").unwrap();
    assert_eq!(liftcal(dir.path(), &["calibrate", "nohead.csv"]).status.code(), Some(2));
    assert_eq!(liftcal(dir.path(), &["calibrate", "missing.csv"]).status.code(), Some(2));

    fs::write(dir.path().join("const.csv"), "y,f_hat\n1,1\n1,2\n1,3\n1,4\n").unwrap();
    assert_eq!(liftcal(dir.path(), &["lcd", "const.csv"]).status.code(), Some(3));
    assert_eq!(liftcal(dir.path(), &["calibrate", "const.csv", "--alpha", "2"]).status.code(), Some(2));
}
