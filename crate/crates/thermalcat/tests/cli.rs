use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use thermalcat::exec::execute;
use thermalcat::program::parse_program;
use thermalcat::ToleranceProfile;

fn programs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../programs")
}

fn golden(name: &str) -> String {
    fs::read_to_string(programs().join(name)).unwrap()
}

fn thermalcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermalcat")).args(args).env_remove("THERMALCAT_TOL_PROFILE").output().unwrap()
}

fn write_program(dir: &Path, text: &str) -> String {
    let path = dir.join("program.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// Rows of a series CSV keyed by header name, comments skipped.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i]).collect()
}

fn summary(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &str = r#"
[system]
modes = 1
g = [1.0]
n_bar_th = [0.2]
alpha = [2.0]

[[steps]]
measure = { observables = ["Pg", "Pe", "mean_n", "purity"], cadence = 0.1 }

[[steps]]
evolve = { duration = 1.0, hamiltonian = "full" }
"#;

#[test]
fn golden_programs_round_trip() {
    for name in ["single_mode_rabi.toml", "echo.toml", "two_mode.toml"] {
        let (first, warnings) = parse_program(&golden(name), true).unwrap();
        assert!(warnings.is_empty(), "{name}: {warnings:?}");
        let text = first.to_toml();
        let (second, _) = parse_program(&text, true).unwrap();
        assert_eq!(first, second, "{name}");
        assert_eq!(text, second.to_toml(), "{name}");
    }
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let program = programs().join("echo.toml");
    for dir in [&a, &b] {
        let out = thermalcat(&["run", "--program", program.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let mut compared = 0;
    for entry in fs::read_dir(a.path()).unwrap() {
        let name = entry.unwrap().file_name();
        if name.to_str().unwrap().ends_with(".meta.json") {
            continue;
        }
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert!(x == y, "{name:?} differs between runs");
        compared += 1;
    }
    assert_eq!(compared, 5);
}

#[test]
fn echo_revives_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let program = programs().join("echo.toml");
    let out = thermalcat(&["run", "--program", program.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&dir.path().join("echo.summary.json"));
    let pg = s["scalars"]["revival.Pg"].as_f64().unwrap();
    assert!((pg - 1.0).abs() < 1e-6, "revival Pg {pg}");
    assert_eq!(s["scalars"]["revival.time"].as_f64(), Some(4.0));
    let integral = s["scalars"]["wigner.2.integral"].as_f64().unwrap();
    assert!((integral - 1.0).abs() < 0.02);
    assert!(s["program"]["system"]["truncation"].is_array());

    let (header, rows) = read_csv(&dir.path().join("echo.csv"));
    let times = column(&header, &rows, "time");
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    assert!((times.last().unwrap() - 4.0).abs() < 1e-12);
    let pg = column(&header, &rows, "Pg");
    assert!((pg.last().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn rabi_program_reports_analytic_column_and_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let program = programs().join("single_mode_rabi.toml");
    let out = thermalcat(&["run", "--program", program.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("rabi.csv"));
    assert_eq!(header, ["time", "Pe", "Pg", "mean_n", "P_analytic"]);
    assert_eq!(rows.len(), 201);
    let pg = column(&header, &rows, "Pg");
    let pe = column(&header, &rows, "Pe");
    assert!(pg.iter().zip(&pe).all(|(g, e)| (g + e - 1.0).abs() < 1e-12));
    let analytic = column(&header, &rows, "P_analytic");
    assert_eq!(analytic[0], 1.0);
    for i in 0..=5 {
        assert!((pg[i] - analytic[i]).abs() < 1e-2, "t={}: {} vs {}", rows[i][0], pg[i], analytic[i]);
    }
    let s = summary(&dir.path().join("rabi.summary.json"));
    for key in ["envelope.tau_c", "envelope.width_ratio", "envelope.collapse_time", "envelope.contrast"] {
        assert!(s["scalars"][key].is_f64(), "{key}");
    }
    // lab-frame photon number starts at |α|² + n̄
    let n = column(&header, &rows, "mean_n");
    assert!((n[0] - 25.5).abs() < 1e-9);
}

#[test]
fn lossless_master_equation_matches_unitary_run() {
    let unitary = parse_program(SMALL, true).unwrap().0;
    let lossless = SMALL.replace(
        "evolve = { duration = 1.0, hamiltonian = \"full\" }",
        "lindblad = { duration = 1.0, kappa = 0.0, n_bar_b = 0.0, dt = 0.005 }",
    );
    let lossless = parse_program(&lossless, true).unwrap().0;
    let a = execute(&unitary, ToleranceProfile::Strict).unwrap();
    let b = execute(&lossless, ToleranceProfile::Strict).unwrap();
    assert_eq!(a.columns, b.columns);
    assert_eq!(a.rows.len(), 11);
    assert_eq!(a.rows.len(), b.rows.len());
    for ((ta, ra), (tb, rb)) in a.rows.iter().zip(&b.rows) {
        assert!((ta - tb).abs() < 1e-12);
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() < 1e-8, "t={ta}: {x} vs {y}");
        }
    }
}

#[test]
fn displaced_and_rwa_generators_agree_at_large_amplitude() {
    let full = parse_program(&SMALL.replace("alpha = [2.0]", "alpha = [12.0]"), true).unwrap().0;
    let rwa = SMALL.replace("alpha = [2.0]", "alpha = [12.0]").replace("\"full\"", "\"rwa\"");
    let rwa = parse_program(&rwa, true).unwrap().0;
    let a = execute(&full, ToleranceProfile::Strict).unwrap();
    let b = execute(&rwa, ToleranceProfile::Strict).unwrap();
    let pg = a.columns.iter().position(|c| c == "Pg").unwrap();
    for ((_, ra), (_, rb)) in a.rows.iter().zip(&b.rows) {
        assert!((ra[pg] - rb[pg]).abs() < 0.02, "{} vs {}", ra[pg], rb[pg]);
    }
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let bad = write_program(dir.path(), &SMALL.replace("evolve", "wait"));
    assert_eq!(thermalcat(&["run", "--program", &bad, "--out", out]).status.code(), Some(2));
    assert_eq!(thermalcat(&["validate", "--program", &bad]).status.code(), Some(2));

    let tight = write_program(dir.path(), &SMALL.replace("[system]", "[system]\ntruncation = [6]"));
    let res = thermalcat(&["run", "--program", &tight, "--out", out]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));

    let ok = write_program(dir.path(), SMALL);
    assert_eq!(thermalcat(&["validate", "--program", &ok]).status.code(), Some(0));
    assert_eq!(thermalcat(&["version"]).status.code(), Some(0));

    let res = Command::new(env!("CARGO_BIN_EXE_thermalcat"))
        .args(["run", "--program", &ok, "--out", out])
        .env("THERMALCAT_TOL_PROFILE", "loose")
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn strict_flag_controls_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_program(dir.path(), &SMALL.replace("modes = 1", "modes = 1\ncolour = \"red\""));
    assert_eq!(thermalcat(&["validate", "--program", &p]).status.code(), Some(2));
    assert_eq!(thermalcat(&["validate", "--program", &p, "--strict"]).status.code(), Some(2));
    let res = thermalcat(&["validate", "--program", &p, "--strict", "false"]);
    assert_eq!(res.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&res.stderr).contains("colour"));
}

#[test]
fn sweep_records_failures_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_program(dir.path(), &SMALL.replace("[system]", "[system]\ntruncation = [24]"));
    let out = dir.path().join("sweep");
    let res = thermalcat(&[
        "sweep",
        "--program",
        &p,
        "--param",
        "steps.2.evolve.duration",
        "--values",
        "1,2,40",
        "--threads",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].starts_with("value,status,truncation,"));
    assert!(rows[1].starts_with("1.0000000000000000e0,ok,24,"));
    assert!(rows[2].starts_with("2.0000000000000000e0,ok,24,"));
    assert!(rows[3].starts_with("4.0000000000000000e1,exit3,"));
    assert!(out.join("point_000/run.csv").exists());
    assert!(!out.join("point_002/run.csv").exists());

    let empty = dir.path().join("empty");
    let res = thermalcat(&[
        "sweep",
        "--program",
        &p,
        "--param",
        "system.alpha",
        "--values",
        "",
        "--out",
        empty.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!empty.exists());
}

#[test]
fn sweep_order_does_not_change_points() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_program(dir.path(), SMALL);
    let mut tables = Vec::new();
    for (values, threads) in [("0.5,1.5", "1"), ("1.5,0.5", "2")] {
        let out = dir.path().join(format!("s{threads}"));
        let res = thermalcat(&[
            "sweep",
            "--program",
            &p,
            "--param",
            "steps.2.evolve.duration",
            "--values",
            values,
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
        let mut rows: Vec<String> = text.lines().filter(|l| !l.starts_with('#')).skip(1).map(String::from).collect();
        rows.sort();
        tables.push(rows);
    }
    assert_eq!(tables[0], tables[1]);
}
