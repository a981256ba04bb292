use std::path::PathBuf;
use std::process::{Command, Output};

fn sample() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sample_3x4.txt")
}

fn chanshort(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chanshort"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn design_prints_indefinite_target() {
    let text = stdout(&chanshort(&["design", sample().to_str().unwrap(), "--k", "1"]));
    assert!(text.contains("lambda_min(G_r) = -0.0825"));
    assert!(text.contains("(indefinite)"));
    assert!(text.contains("   1.9286    1.2500"));
    assert!(text.contains("I(Y;X2|X1)"));
}

#[test]
fn design_blocks_as_json() {
    let text = stdout(&chanshort(&[
        "design",
        sample().to_str().unwrap(),
        "--blocks",
        "2,2",
        "--format",
        "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let g = |r: usize, c: usize| v["g_r"][r][c][0].as_f64().unwrap();
    assert!((g(2, 2) - 17.0 / 12.0).abs() < 1e-9);
    assert_eq!(g(1, 2), 0.0);
    assert!(v["lambda_min"].as_f64().unwrap() > 0.0);
    assert_eq!(v["rates"]["kind"], "blocks");
}

#[test]
fn rates_routes_agree_in_bits() {
    let text = stdout(&chanshort(&[
        "rates",
        sample().to_str().unwrap(),
        "--k",
        "2",
        "--units",
        "bits",
        "--format",
        "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["units"], "bits");
    let r = &v["report"];
    let logdet = r["gmi_logdet"].as_f64().unwrap();
    for key in ["gmi_functional", "gmi_column_removal", "gmi_chain"] {
        assert!((r[key].as_f64().unwrap() - logdet).abs() < 1e-9, "{key}");
    }
    assert!(r["i_mmse"].as_f64().unwrap() <= logdet);
    assert!(logdet <= r["i_full"].as_f64().unwrap());
}

#[test]
fn ergodic_csv_is_reproducible() {
    let args = ["ergodic", "--trials", "30", "--snr-db", "-10:10:20", "--seed", "9"];
    let a = stdout(&chanshort(&args));
    let b = stdout(&chanshort(&args));
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert!(lines.next().unwrap().starts_with("# seed=9 experiment=ergodic trials=30"));
    assert_eq!(lines.next().unwrap(), "experiment,snr_db,param,statistic,value,trials,stderr");
    assert!(a.contains("ergodic,-10.0,nR=4 nT=6 K=2,rate_direct,"));
    assert!(a.contains("slope_direct"));
}

#[test]
fn sweeps_write_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("isi.json");
    let out = chanshort(&[
        "isi",
        "--nt",
        "8",
        "--taps",
        "17",
        "--snr-db",
        "0:10:20",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(stdout(&out).is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["config"]["taps"], 17);
    assert!(v["records"].as_array().unwrap().len() >= 12);
}

#[test]
fn correlated_experiments_run() {
    let text = stdout(&chanshort(&[
        "indefinite",
        "--trials",
        "50",
        "--snr-db",
        "0",
        "--alpha",
        "0.1,0.5",
    ]));
    assert_eq!(text.lines().filter(|l| l.contains("p_indefinite")).count(), 2);
    let text = stdout(&chanshort(&["classical-gap", "--trials", "50", "--snr-db", "-5:5:0"]));
    assert!(text.contains("indefinite_count"));
}

#[test]
fn config_errors_exit_2() {
    let s = sample();
    let s = s.to_str().unwrap();
    for args in [
        vec!["design", "/nonexistent/channel.txt"],
        vec!["design", s, "--blocks", "2,3"],
        vec!["design", s, "--k", "4"],
        vec!["design", s, "--n0", "0"],
        vec!["ergodic", "--snr-db", "10:0:20"],
        vec!["ergodic", "--trials", "0"],
        vec!["indefinite", "--units", "bytes"],
        vec!["isi", "--taps", "64"],
    ] {
        let out = chanshort(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn numerical_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("huge.txt");
    std::fs::write(&path, "2 2\n1e200 0\n0 1\n").unwrap();
    let out = chanshort(&["design", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let out = chanshort(&["rates", sample().to_str().unwrap(), "--n0", "1e-300"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn parse_errors_name_the_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "2 2\n1 0\n0 x\n").unwrap();
    let out = chanshort(&["design", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}
