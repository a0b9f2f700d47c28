use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_exciton-walk");

fn fmo_file() -> String {
    format!("{}/data/fmo.json", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_column(path: &Path, col: usize) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn simulate_writes_report_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--network", &fmo_file(), "--init", "site:1", "--t-max", "10ps", "--check"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("report.json"));
    let eta = r["eta"].as_f64().unwrap();
    assert!((eta - 0.99).abs() < 0.02);
    assert!((r["tau"].as_f64().unwrap() - 4.0).abs() < 1.0);
    assert!(r["residual"].as_f64().unwrap().abs() < 1e-8);
    assert!(r["quadrature"]["eta_deviation"].as_f64().unwrap() < 1e-6);
    assert_eq!(r["params"]["trap_rates_ps1"]["3"].as_f64(), Some(1.0));
    let traj = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let header = traj.lines().next().unwrap();
    assert!(header.starts_with("time_ps,pop_1,"));
    assert!(header.ends_with("coh_6_7,trapped,lost"));
    assert_eq!(traj.lines().count(), 1002);
}

#[test]
fn mixture_lies_between_sites() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--network", &fmo_file(), "--init", "mixture:1,6", "--reorg", "0", "--t-max", "1ps"], dir.path());
    assert!(o.status.success());
    let eta = json(&dir.path().join("report.json"))["eta"].as_f64().unwrap();
    assert!(eta > 0.70 && eta < 0.85, "{eta}");
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sweep", "--param", "temperature", "--grid", "lin:77:350:6", "--format", "csv", "--jobs", "3"];
    assert!(run(&args, a.path()).status.success());
    assert!(run(&args, b.path()).status.success());
    let x = std::fs::read(a.path().join("curve.csv")).unwrap();
    let y = std::fs::read(b.path().join("curve.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn sweeps_have_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sweep", "--param", "reorg", "--grid", "log:0.01:100:25", "--format", "csv"], dir.path());
    assert!(o.status.success());
    let eta = csv_column(&dir.path().join("curve.csv"), 1);
    assert_eq!(eta.len(), 25);
    assert!(eta[24] > eta[0]);

    let o = run(&["sweep", "--param", "trap", "--grid", "log:1e-4:10:30", "--format", "csv"], dir.path());
    assert!(o.status.success());
    let eta = csv_column(&dir.path().join("curve.csv"), 1);
    assert!(eta.windows(2).all(|w| w[1] > w[0]));
    let text = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert!(text.starts_with("trap_ps1,eta,tau_ps,eta_loss,residual\n"));

    let o = run(&["sweep", "--param", "temperature", "--grid", "lin:77:350:20", "--format", "csv"], dir.path());
    assert!(o.status.success());
    let eta = csv_column(&dir.path().join("curve.csv"), 1);
    let range = eta.iter().cloned().fold(f64::MIN, f64::max) - eta.iter().cloned().fold(f64::MAX, f64::min);
    assert!(range < 0.01);
}

#[test]
fn susceptibility_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["susceptibility", "--hessian"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("susceptibility.json"));
    assert!(r["gradient_sum"].as_f64().unwrap().abs() < 1e-4);
    let h = r["hessian"].as_array().unwrap();
    for j in 0..5 {
        for k in 0..5 {
            let a = h[j][k].as_f64().unwrap();
            let b = h[k][j].as_f64().unwrap();
            assert!((a - b).abs() < 1e-8);
        }
    }
    assert!(r["hessian_sum"].as_f64().unwrap().abs() < 1e-3);
    let text = std::fs::read_to_string(dir.path().join("pathway.csv")).unwrap();
    let mut into = 0;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[1] == "3" {
            assert!(f[3].parse::<f64>().unwrap() > 0.0, "{line}");
            into += 1;
        }
    }
    assert_eq!(into, 6);

    let o = run(&["susceptibility", "--method", "fd"], dir.path());
    assert!(o.status.success());
    assert_eq!(json(&dir.path().join("susceptibility.json"))["method"], "fd");
}

#[test]
fn grover_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["grover", "--network", &fmo_file(), "--target", "3"], dir.path());
    assert!(o.status.success());
    let r = json(&dir.path().join("grover.json"));
    assert!(r["max_overlap"].as_f64().unwrap() <= 0.45);
    assert_eq!(r["condition_ii"], false);
    assert_eq!(r["target"], 3);

    let dimer = dir.path().join("dimer.json");
    std::fs::write(
        &dimer,
        r#"{"sites": [{"energy_cm1": 0.0}, {"energy_cm1": 0.0}],
            "couplings": [[0, 1, 50.0]],
            "trap_rates_ps1": {}, "loss_rate_ps1": 0.0,
            "bath": {"temperature_K": 0.0, "reorg_cm1": 0.0, "cutoff_cm1": 150.0}}"#,
    )
    .unwrap();
    let o = run(&["grover", "--network", dimer.to_str().unwrap(), "--target", "2", "--t-max", "1ps", "--dt", "0.5fs"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&dir.path().join("grover.json"))["condition_ii"], true);
}

#[test]
fn failure_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--network", "/no/such/file.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("network file not found"));

    assert_eq!(run(&["grover", "--target", "0"], dir.path()).status.code(), Some(66));
    assert_eq!(run(&["simulate", "--temperature", "300C"], dir.path()).status.code(), Some(64));
    assert_eq!(run(&["simulate", "--bogus"], dir.path()).status.code(), Some(64));
    assert_eq!(run(&["sweep", "--param", "pressure", "--grid", "lin:1:2:2"], dir.path()).status.code(), Some(66));
    assert_eq!(run(&["simulate", "--builder", "magic"], dir.path()).status.code(), Some(66));
    // nothing can leave the network
    assert_eq!(run(&["simulate", "--trap", "0", "--loss", "0"], dir.path()).status.code(), Some(70));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"sites\": []").unwrap();
    assert_eq!(run(&["simulate", "--network", bad.to_str().unwrap()], dir.path()).status.code(), Some(65));

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    assert_eq!(run(&["grover"], &blocker).status.code(), Some(74));

    let help = Command::new(BIN).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    let text = String::from_utf8_lossy(&help.stdout);
    for code in ["2 ", "64", "65", "66", "70", "74"] {
        assert!(text.contains(code), "{code}");
    }
}
