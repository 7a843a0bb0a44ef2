use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn opucz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opucz"))
        .args(args)
        .env_remove("OPUCZ_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary_without_timing(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("elapsed_seconds");
    v
}

fn simulate(prefix: &Path, extra: &[&str]) -> Output {
    let out = prefix.to_str().unwrap();
    let mut args = vec![
        "simulate", "--alphas", "constant:0.3", "--n", "30", "--model", "gaussian", "--region", "sector:0.5:0:pi/2",
        "--trials", "300", "--seed", "17", "--out", out,
    ];
    args.extend_from_slice(extra);
    opucz(&args)
}

#[test]
fn variance_limit_prints_twelve_digits() {
    let o = opucz(&["variance-limit", "--s", "0", "--t", "0.5", "--method", "closed"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0.266666666667\n");
    let o = opucz(&["variance-limit", "--s", "1.5", "--t", "2", "--method", "all"]);
    assert_eq!(stdout(&o), "closed 0.403846153846\nseries 0.403846153846\nquadrature 0.403846153846\n");
}

#[test]
fn simulate_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(simulate(&a, &["--threads", "1"]).status.success());
    assert!(simulate(&b, &["--threads", "3"]).status.success());
    let ca = fs::read(dir.path().join("a.counts.csv")).unwrap();
    let cb = fs::read(dir.path().join("b.counts.csv")).unwrap();
    assert_eq!(ca, cb);
    let text = String::from_utf8(ca).unwrap();
    assert!(text.starts_with("trial,count\n") && !text.contains('\r') && !text.ends_with("\n\n"));
    assert_eq!(text.lines().count(), 301);
    let mut sa = summary_without_timing(&dir.path().join("a.summary.json"));
    let mut sb = summary_without_timing(&dir.path().join("b.summary.json"));
    for s in [&mut sa, &mut sb] {
        s["config"].as_object_mut().unwrap().remove("out");
    }
    assert_eq!(sa, sb);
    for key in ["command", "config", "n", "trials", "seed", "mean", "variance", "se_mean", "se_var", "excluded"] {
        assert!(sa.get(key).is_some(), "{key}");
    }
}

#[test]
fn thread_env_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let o = Command::new(env!("CARGO_BIN_EXE_opucz"))
        .args(["simulate", "--n", "10", "--trials", "20", "--threads", "2", "--out", a.to_str().unwrap()])
        .env("OPUCZ_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("OPUCZ_THREADS"));
}

#[test]
fn config_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    assert!(simulate(&first, &[]).status.success());
    let cfg = dir.path().join("first.summary.json");
    let o = opucz(&["simulate", "--config", cfg.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(dir.path().join("first.counts.csv")).unwrap(),
        fs::read(dir.path().join("second.counts.csv")).unwrap()
    );
    let mut a = summary_without_timing(&cfg);
    let mut b = summary_without_timing(&dir.path().join("second.summary.json"));
    a["config"]["out"] = Value::Null;
    b["config"]["out"] = Value::Null;
    assert_eq!(a, b);

    // a bare option object works too
    let mut bare_cfg = a["config"].clone();
    bare_cfg["out"] = Value::from(dir.path().join("bare").to_str().unwrap());
    let bare = dir.path().join("bare.json");
    fs::write(&bare, serde_json::to_string(&bare_cfg).unwrap()).unwrap();
    let o = opucz(&["simulate", "--config", bare.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(dir.path().join("first.counts.csv")).unwrap(),
        fs::read(dir.path().join("bare.counts.csv")).unwrap()
    );
}

#[test]
fn region_grammar_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    for (region, field) in [
        ("annulus:a:1", "`s`"),
        ("annulus:0:b", "`t`"),
        ("annulus:0.6:0.5", "`t`"),
        ("sector:2:0:1", "`r`"),
        ("sector:0.5:x:1", "`alpha`"),
        ("sector:0.5:1:y", "`beta`"),
        ("wedge:1:2", "`kind`"),
        ("annulus:0", "fields"),
    ] {
        let o = opucz(&["simulate", "--n", "5", "--trials", "4", "--region", region, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{region}");
        let err = stderr(&o);
        assert!(err.contains("--region") && err.contains(field), "{region}: {err}");
    }
}

#[test]
fn exit_codes() {
    let o = opucz(&["variance-limit", "--s", "0.5", "--t", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("RegionTouchesCircle"));
    let o = opucz(&["variance-limit", "--method", "guess"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--method"));
    assert_eq!(opucz(&["simulate", "--n", "5", "--nonsense"]).status.code(), Some(2));
    assert_eq!(opucz(&["basis", "--alphas", "decay:1"]).status.code(), Some(2));
    assert_eq!(opucz(&["basis", "--alphas", "constant:1.5"]).status.code(), Some(1));
    let o = opucz(&["kernel", "--n", "3", "--z", "1,0", "--w", "1,0", "--method", "cd"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("NearDiagonalSingularity"));
}

#[test]
fn basis_report_shows_decaying_epsilon() {
    let o = opucz(&["basis", "--alphas", "decay:1:1", "--n", "50", "--report"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let eps = |k: usize| -> f64 {
        let line = text.lines().nth(k).unwrap();
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], k.to_string());
        cols[1].parse().unwrap()
    };
    assert!(eps(50) < eps(10));
}

#[test]
fn kernel_and_intensity_commands() {
    let o = opucz(&["kernel", "--alphas", "decay:1:1", "--n", "10", "--z", "0.2,0.1", "--w", "-0.3,0.2"]);
    assert!(o.status.success());
    let rows: Vec<Vec<String>> = stdout(&o).lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 6);
    for i in 0..3 {
        let d: f64 = rows[i][2].parse().unwrap();
        let c: f64 = rows[i + 3][2].parse().unwrap();
        assert!((d - c).abs() <= 1e-9 * d.abs().max(1.0));
    }
    let o = opucz(&["intensity", "--n", "10", "--z", "0", "--limit"]);
    let text = stdout(&o);
    assert!(text.contains("rho1_n 0.318309886184") && text.contains("rho1_limit 0.318309886184"), "{text}");
    let o = opucz(&["intensity", "--n", "10", "--z", "0.5", "--w", "2", "--limit"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("MixedSides"));
}

#[test]
fn convergence_writes_table_and_chart() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv");
    let o = opucz(&[
        "convergence", "--alphas", "zero", "--ns", "10,20", "--trials", "40", "--seed", "2", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("conv.convergence.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,mean_abs_dev,var_over_n2,envelope_sqrtlogn,envelope_eps14"));
    assert_eq!(lines.count(), 2);
    let svg = fs::read_to_string(dir.path().join("conv.convergence.svg")).unwrap();
    assert!(svg.contains(r#"width="800" height="600""#));
    assert_eq!(svg.matches("<polyline").count(), 4);
    let o = opucz(&["convergence", "--region", "annulus:0:0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = opucz(&["convergence", "--ns", "20,10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--ns"));
}
