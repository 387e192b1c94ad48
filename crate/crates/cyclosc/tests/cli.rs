//! End-to-end checks of the `cyclosc` binary: flags, exit codes, file
//! formats and determinism under different thread counts.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cyclosc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("temp dir")
}

fn path_str(dir: &tempfile::TempDir, name: &str) -> (PathBuf, String) {
    let p = dir.path().join(name);
    let s = p.to_str().unwrap().to_string();
    (p, s)
}

#[test]
fn analyze_seven_gene_report_and_exit_code() {
    let dir = tempdir();
    let (path, path_s) = path_str(&dir, "report.json");
    let output = run(&[
        "analyze",
        "--preset",
        "example7",
        "--methods",
        "all",
        "--out",
        &path_s,
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["tool"]["name"], "cyclosc");
    let q = report["reduced"]["q"].as_f64().unwrap();
    assert!((q - 0.800).abs() < 1e-3);
    let l = report["reduced"]["l"].as_f64().unwrap();
    assert!((l - 1.048).abs() < 3e-3);
    let l_bar = report["thresholds"]["l_bar"].as_f64().unwrap();
    assert!((l_bar - 1.031).abs() < 5e-3);
    assert_eq!(report["verdicts"].as_array().unwrap().len(), 4);
    for verdict in report["verdicts"].as_array().unwrap() {
        assert_eq!(verdict["outcome"], "OscillationsGuaranteed");
    }
}

#[test]
fn analyze_stable_preset_exits_one() {
    let dir = tempdir();
    let (path, path_s) = path_str(&dir, "mutant.json");
    let output = run(&["analyze", "--preset", "hes7_mutant", "--out", &path_s]);
    assert_eq!(output.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let l_bar = report["thresholds"]["l_bar"].as_f64().unwrap();
    assert!((l_bar - 2.39).abs() < 0.01);
    // Past the cooperativity limit no ratio threshold applies.
    assert!(report["thresholds"]["r_bar"].is_null());
}

#[test]
fn analyze_accepts_spec_files_and_tolerance_knobs() {
    let dir = tempdir();
    let (spec_path, spec_s) = path_str(&dir, "net.json");
    let preset = run(&["presets", "show", "counterexample"]);
    std::fs::write(&spec_path, stdout_of(&preset)).unwrap();

    let (config_path, config_s) = path_str(&dir, "tol.json");
    std::fs::write(&config_path, r#"{"scalar": 1e-9}"#).unwrap();

    let (_, out_s) = path_str(&dir, "report.json");
    let output = run(&[
        "analyze", "--spec", &spec_s, "--tol", "1e-9", "--config", &config_s, "--out", &out_s,
    ]);
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn simulate_prints_the_classification() {
    let dir = tempdir();
    let (traj_path, traj_s) = path_str(&dir, "traj.csv");
    let output = run(&[
        "simulate",
        "--preset",
        "counterexample",
        "--history",
        "const:0.699,1.224,0.698,1.226,0.697,1.225",
        "--t-end",
        "100",
        "--stride",
        "50",
        "--out",
        &traj_s,
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    assert_eq!(stdout_of(&output).trim(), "Oscillating");

    let text = std::fs::read_to_string(&traj_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,r1,p1,r2,p2,r3,p3");
    let first = lines.next().unwrap();
    assert!(first.starts_with("0.0000000000000000e0,6.9899999999999995e-1"));
}

#[test]
fn simulate_from_history_file() {
    let dir = tempdir();
    let (hist_path, hist_s) = path_str(&dir, "history.csv");
    let mut lines = vec!["t,r1,p1,r2,p2,r3,p3".to_string()];
    for k in 0..=10 {
        let t = -2.0 + 0.2 * k as f64;
        lines.push(format!("{t},0.699,1.224,0.698,1.226,0.697,1.225"));
    }
    std::fs::write(&hist_path, lines.join("\n")).unwrap();
    let (_, traj_s) = path_str(&dir, "traj.csv");
    let output = run(&[
        "simulate",
        "--preset",
        "counterexample",
        "--history",
        &hist_s,
        "--t-end",
        "60",
        "--out",
        &traj_s,
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
}

#[test]
fn sweep_writes_grid_metadata_and_boundary() {
    let dir = tempdir();
    let (grid_path, grid_s) = path_str(&dir, "grid.csv");
    let (boundary_path, boundary_s) = path_str(&dir, "boundary.csv");
    let output = run(&[
        "sweep",
        "--preset",
        "hes7_wild",
        "--x",
        "t_p-halflife:1:40:10:log",
        "--y",
        "t_r-halflife:1.5:6:3:log",
        "--out",
        &grid_s,
        "--boundary",
        &boundary_s,
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");

    let grid = std::fs::read_to_string(&grid_path).unwrap();
    assert!(grid.starts_with("x,y,outcome,L,L_bar,margin\n"));
    assert_eq!(grid.lines().count(), 1 + 30);

    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(grid_path.with_extension("csv.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["x"]["parameter"], "t_p-halflife");
    assert_eq!(meta["y"]["scale"], "log10");

    let boundary = std::fs::read_to_string(&boundary_path).unwrap();
    assert!(boundary.starts_with("segment,x,y\n"));
    assert!(boundary.lines().count() > 1);
}

#[test]
fn sweep_axis_count_defaults_to_two_hundred() {
    let dir = tempdir();
    let (grid_path, grid_s) = path_str(&dir, "grid.csv");
    let output = run(&[
        "sweep",
        "--preset",
        "repressilator",
        "--x",
        "alpha:100:1000:4:log",
        "--y",
        "gamma:0.1:0.3:log",
        "--out",
        &grid_s,
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let grid = std::fs::read_to_string(&grid_path).unwrap();
    assert_eq!(grid.lines().count(), 1 + 4 * 200);
}

#[test]
fn sweep_output_is_independent_of_thread_count() {
    let dir = tempdir();
    let (path_a, s_a) = path_str(&dir, "a.csv");
    let (path_b, s_b) = path_str(&dir, "b.csv");
    let args = |out: &str| {
        vec![
            "sweep".to_string(),
            "--preset".into(),
            "repressilator".into(),
            "--x".into(),
            "alpha:10:2000:12:log".into(),
            "--y".into(),
            "gamma:0.05:1:8:log".into(),
            "--out".into(),
            out.to_string(),
        ]
    };
    let a = bin()
        .args(args(&s_a))
        .env("CYCLOSC_THREADS", "1")
        .output()
        .unwrap();
    let b = bin()
        .args(args(&s_b))
        .env("CYCLOSC_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(
        std::fs::read(&path_a).unwrap(),
        std::fs::read(&path_b).unwrap()
    );
}

#[test]
fn nyquist_prints_the_winding_number() {
    let dir = tempdir();
    let (curve_path, curve_s) = path_str(&dir, "curve.csv");
    let output = run(&["nyquist", "--preset", "counterexample", "--out", &curve_s]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    assert_eq!(stdout_of(&output).trim(), "2");
    let text = std::fs::read_to_string(&curve_path).unwrap();
    assert!(text.starts_with("omega,re,im\n"));
    assert!(text.lines().count() > 100);
}

#[test]
fn boundary_writes_curve_and_eigenvalue_ring() {
    let dir = tempdir();
    let (curve_path, curve_s) = path_str(&dir, "curve.csv");
    let output = run(&[
        "boundary",
        "--N",
        "3",
        "--Q",
        "1.0",
        "--tau-tilde",
        "1.0",
        "--gain",
        "1.2",
        "--samples",
        "64",
        "--out",
        &curve_s,
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let curve = std::fs::read_to_string(&curve_path).unwrap();
    assert!(curve.starts_with("omega_tilde,re,im\n"));
    assert_eq!(curve.lines().count(), 1 + 127);
    let ring = std::fs::read_to_string(curve_path.with_extension("csv.ring.csv")).unwrap();
    assert_eq!(ring.lines().count(), 1 + 3);
    let first_ring_row = ring.lines().nth(1).unwrap();
    assert!(first_ring_row.starts_with("1,0.600000000000000"));
}

#[test]
fn presets_catalog() {
    let list = run(&["presets", "list"]);
    assert_eq!(list.status.code(), Some(0));
    let text = stdout_of(&list);
    for name in ["example7", "counterexample", "hes7_wild"] {
        assert!(text.contains(name));
    }
    let show = run(&["presets", "show", "repressilator"]);
    let spec: serde_json::Value = serde_json::from_str(&stdout_of(&show)).unwrap();
    assert_eq!(spec["genes"].as_array().unwrap().len(), 3);
    assert_eq!(spec["genes"][0]["alpha0"], 0.0866);
}

#[test]
fn exit_codes_for_failure_modes() {
    let dir = tempdir();
    let (_, out_s) = path_str(&dir, "x.json");

    // Malformed flags.
    let output = run(&["analyze", "--preset", "example7"]);
    assert_eq!(output.status.code(), Some(64), "missing --out");
    let output = run(&["analyze", "--preset", "nope", "--out", &out_s]);
    assert_eq!(output.status.code(), Some(64), "unknown preset");
    let output = run(&[
        "analyze",
        "--preset",
        "example7",
        "--methods",
        "magic",
        "--out",
        &out_s,
    ]);
    assert_eq!(output.status.code(), Some(64), "unknown method");
    let output = run(&[
        "sweep",
        "--preset",
        "example7",
        "--x",
        "bogus:1:2:3",
        "--y",
        "nu:1:2:3",
        "--out",
        &out_s,
    ]);
    assert_eq!(output.status.code(), Some(64), "unknown axis parameter");
    let output = run(&[
        "sweep",
        "--preset",
        "example7",
        "--x",
        "nu:1:2:huh",
        "--y",
        "nu:1:2:3",
        "--out",
        &out_s,
    ]);
    assert_eq!(output.status.code(), Some(64), "unparsable axis token");

    // Unreadable input files.
    let output = run(&[
        "analyze",
        "--spec",
        "/nonexistent/net.json",
        "--out",
        &out_s,
    ]);
    assert_eq!(output.status.code(), Some(66), "missing spec file");
    let (bad_path, bad_s) = path_str(&dir, "bad.json");
    std::fs::write(&bad_path, "{ not json").unwrap();
    let output = run(&["analyze", "--spec", &bad_s, "--out", &out_s]);
    assert_eq!(output.status.code(), Some(66), "unparsable spec file");

    // Numerical / staged failures carry the stage name.
    let (het_path, het_s) = path_str(&dir, "het.json");
    let mut spec = cyclosc::load_preset("counterexample").unwrap();
    spec.genes[0].a = 2.0;
    std::fs::write(&het_path, spec.to_json()).unwrap();
    let output = run(&["analyze", "--spec", &het_s, "--out", &out_s]);
    assert_eq!(output.status.code(), Some(70), "heterogeneous spec");
    assert!(String::from_utf8_lossy(&output.stderr).contains("linearization"));

    let (pos_path, pos_s) = path_str(&dir, "pos.json");
    let mut spec = cyclosc::load_preset("counterexample").unwrap();
    spec.genes[0].regulation = cyclosc::Regulation::Activate;
    std::fs::write(&pos_path, spec.to_json()).unwrap();
    let output = run(&["analyze", "--spec", &pos_s, "--out", &out_s]);
    assert_eq!(output.status.code(), Some(70), "positive cycle");
    assert!(String::from_utf8_lossy(&output.stderr).contains("validation"));

    // Help and version are not failures.
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}
