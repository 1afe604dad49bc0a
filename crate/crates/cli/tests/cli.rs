use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qgvertex"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, value.to_string()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn csv_rows(out: &Output) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn delta3(dir: &TempDir) -> PathBuf {
    write(dir, "delta.json", &json!({"kind": "Delta", "param": 3.0, "n": 3}))
}

fn free3(dir: &TempDir) -> PathBuf {
    write(dir, "free.json", &json!({"kind": "Free", "param": 0.0, "n": 3}))
}

fn identity_u(dir: &TempDir) -> PathBuf {
    write(
        dir,
        "id.json",
        &json!({"n": 2, "U": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}),
    )
}

#[test]
fn classify_delta() {
    let dir = TempDir::new().unwrap();
    let out = run(&["classify", s(&delta3(&dir))]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["class"], "TypeII");
    assert!((report["gamma"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert_eq!(report["equally_transmitting"], true);
}

#[test]
fn classify_free() {
    let dir = TempDir::new().unwrap();
    let out = run(&["classify", s(&free3(&dir))]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["class"], "TypeI");
}

#[test]
fn classify_three_eigenvalues_exits_4() {
    let dir = TempDir::new().unwrap();
    let (c, sn) = ((PI / 3.0).cos(), (PI / 3.0).sin());
    let path = write(
        &dir,
        "three.json",
        &json!({"n": 3, "U": [[[1, 0], [0, 0], [0, 0]], [[0, 0], [c, sn], [0, 0]], [[0, 0], [0, 0], [-1, 0]]]}),
    );
    let out = run(&["classify", s(&path)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stdout_json(&out)["residual"].as_f64().unwrap() > 0.1);
}

#[test]
fn parse_and_unitarity_exit_codes() {
    let dir = TempDir::new().unwrap();
    let garbage = dir.path().join("bad.json");
    fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(run(&["classify", s(&garbage)]).status.code(), Some(2));

    let both = write(&dir, "both.json", &json!({"n": 1, "U": [[[1, 0]]], "kind": "Free"}));
    assert_eq!(run(&["classify", s(&both)]).status.code(), Some(2));

    let non_unitary = write(
        &dir,
        "nu.json",
        &json!({"n": 2, "U": [[[1, 0], [0.5, 0]], [[0, 0], [1, 0]]]}),
    );
    assert_eq!(run(&["classify", s(&non_unitary)]).status.code(), Some(3));
}

#[test]
fn scatter_free_is_constant() {
    let dir = TempDir::new().unwrap();
    let out = run(&["scatter", s(&free3(&dir)), "--points", "3"]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 3);
    assert_eq!(header.last().unwrap(), "unitarity_residual");
    let (r1, t12) = (column(&header, "R_1"), column(&header, "T_1_2"));
    for row in &rows {
        assert!((row[r1] - 1.0 / 9.0).abs() < 1e-12);
        assert!((row[t12] - 4.0 / 9.0).abs() < 1e-12);
    }
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
}

#[test]
fn scatter_delta_at_one() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "scatter",
        s(&delta3(&dir)),
        "--k-min",
        "1",
        "--k-max",
        "2",
        "--points",
        "2",
    ]);
    let (header, rows) = csv_rows(&out);
    assert_eq!(rows[0][0], 1.0);
    assert!((rows[0][column(&header, "R_2")] - 5.0 / 9.0).abs() < 1e-12);
    assert!((rows[0][column(&header, "T_3_1")] - 2.0 / 9.0).abs() < 1e-12);
}

#[test]
fn scatter_identity_reflects_fully() {
    let dir = TempDir::new().unwrap();
    let out = run(&["scatter", s(&identity_u(&dir)), "--points", "5"]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        for (h, v) in header.iter().zip(&cells) {
            if h.starts_with("R_") {
                assert_eq!(v.parse::<f64>().unwrap(), 1.0);
            } else if h.starts_with("T_") {
                assert_eq!(v.parse::<f64>().unwrap(), 0.0);
            }
        }
    }
}

#[test]
fn csv_uses_fifteen_digits() {
    let dir = TempDir::new().unwrap();
    let out = run(&["scatter", s(&free3(&dir)), "--points", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let cell = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    let mantissa = cell.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 15);
}

#[test]
fn rho_delta_and_free() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "rho",
        s(&delta3(&dir)),
        "--k-min",
        "1",
        "--k-max",
        "10",
        "--points",
        "4",
    ]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["k", "rho_closed", "rho_sampled", "abs_diff"]);
    assert!((rows[0][1] - 2.5).abs() < 1e-9);
    assert!(rows.iter().all(|r| r[3] <= 1e-9));

    let out = run(&["rho", s(&free3(&dir))]);
    let (_, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 61);
    assert!(rows.iter().all(|r| (r[1] - 0.25).abs() < 1e-12));
}

#[test]
fn rho_decoupled_exits_5() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["rho", s(&identity_u(&dir))]).status.code(), Some(5));
    let diag = write(
        &dir,
        "diag.json",
        &json!({"n": 2, "U": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}),
    );
    assert_eq!(run(&["rho", s(&diag)]).status.code(), Some(5));
}

#[test]
fn design_type_ii_gives_delta() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("designed.json");
    let out = run(&[
        "design",
        "--type",
        "II",
        "--n",
        "3",
        "--c",
        "2.25",
        "--sign",
        "-1",
        "--output",
        s(&path),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let designed: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert!(designed["spectral"]["M"].is_array());

    let out = run(&["classify", s(&path)]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["class"], "TypeII");
    assert!((report["gamma"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert_eq!(report, designed["report"]);
}

#[test]
fn design_type_iii_gives_delta_prime() {
    let out = run(&["design", "--type", "III", "--n", "3", "--c", "1", "--sign", "-1"]);
    assert!(out.status.success());
    let report = &stdout_json(&out)["report"];
    assert_eq!(report["class"], "TypeIII");
    assert!((report["gamma_prime"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn design_type_iv_out_of_range_exits_6() {
    let out = run(&["design", "--type", "IV", "--n", "3", "--c", "1.2", "--tan-xi", "-1"]);
    assert_eq!(out.status.code(), Some(6));
    let report = stdout_json(&out);
    assert_eq!(report["interval"], "(0, 1.125]");
    assert!(String::from_utf8_lossy(&out.stderr).contains("(0, 1.125]"));

    let ok = run(&["design", "--type", "IV", "--n", "3", "--c", "1.0", "--tan-xi", "-1"]);
    assert!(ok.status.success());
    let report = &stdout_json(&ok)["report"];
    assert_eq!(report["class"], "TypeIV");
    assert!((report["xi"].as_f64().unwrap() + PI / 4.0).abs() < 1e-9);
}

#[test]
fn design_from_m_file() {
    let dir = TempDir::new().unwrap();
    let h = [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]];
    let m: Vec<Vec<[f64; 2]>> = h
        .iter()
        .map(|row| row.iter().map(|&x| [x as f64 / 2.0, 0.0]).collect())
        .collect();
    let path = write(&dir, "m.json", &json!({"n": 4, "M": m}));
    let out = run(&["design", "--type", "II", "--m-file", s(&path), "--c", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!((stdout_json(&out)["report"]["c"].as_f64().unwrap() - 3.0).abs() < 1e-9);
}

#[test]
fn search_mps_catalogs() {
    let out = run(&["search-mps", "--n", "3"]);
    assert!(out.status.success());
    let catalog = stdout_json(&out);
    assert_eq!(catalog["bound_verdict"], true);
    let entries = catalog["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    assert!(entries.iter().all(|e| (e["d"].as_f64().unwrap() - 0.5).abs() < 1e-12));

    let catalog = stdout_json(&run(&["search-mps", "--n", "4"]));
    assert_eq!(catalog["bound_verdict"], true);
    assert!(catalog["entries"]
        .as_array()
        .unwrap()
        .iter()
        .any(|e| (e["d"].as_f64().unwrap() - 1.0).abs() < 1e-12));

    let catalog = stdout_json(&run(&["search-mps", "--n", "2"]));
    assert!(catalog["exemption"].is_string());
    assert!(catalog["bound_verdict"].is_null());

    assert_eq!(run(&["search-mps", "--n", "7"]).status.code(), Some(7));
}

#[test]
fn verify_delta_passes() {
    let dir = TempDir::new().unwrap();
    let out = run(&["verify", s(&delta3(&dir))]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["all_pass"], true);
    assert_eq!(report["scale_invariant"], false);
    let names: Vec<_> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].clone())
        .collect();
    for want in [
        "s_unitarity",
        "formula_equivalence",
        "mu_nu_identities",
        "ratio_constancy",
    ] {
        assert!(names.contains(&json!(want)));
    }
}

#[test]
fn verify_corrupted_u_fails() {
    let dir = TempDir::new().unwrap();
    let out = run(&["design", "--type", "II", "--n", "3", "--c", "2.25", "--sign", "-1"]);
    let mut designed = stdout_json(&out);
    let entry = &mut designed["U"][0][1][0];
    *entry = json!(entry.as_f64().unwrap() + 1e-3);
    let path = write(&dir, "corrupt.json", &designed);
    let out = run(&["verify", s(&path)]);
    assert!(!out.status.success());
    let report = stdout_json(&out);
    let first = &report["checks"][0];
    assert_eq!(first["name"], "input_unitarity");
    assert_eq!(first["status"], "fail");
}

#[test]
fn verify_hermitian_is_scale_invariant() {
    let dir = TempDir::new().unwrap();
    let out = run(&["verify", s(&free3(&dir))]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["scale_invariant"], true);
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let delta = delta3(&dir);
    for args in [
        vec!["classify", s(&delta)],
        vec!["scatter", s(&delta)],
        vec!["rho", s(&delta), "--linear"],
        vec!["search-mps", "--n", "4"],
    ] {
        assert_eq!(run(&args).stdout, run(&args).stdout);
    }
}

#[test]
fn spectral_form_input() {
    let dir = TempDir::new().unwrap();
    let m = [
        [[-1.0 / 3.0, 0.0], [2.0 / 3.0, 0.0], [2.0 / 3.0, 0.0]],
        [[2.0 / 3.0, 0.0], [-1.0 / 3.0, 0.0], [2.0 / 3.0, 0.0]],
        [[2.0 / 3.0, 0.0], [2.0 / 3.0, 0.0], [-1.0 / 3.0, 0.0]],
    ];
    let path = write(&dir, "spectral.json", &json!({"n": 3, "alpha": 0.0, "beta": PI, "M": m}));
    let out = run(&["classify", s(&path)]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["class"], "TypeI");
}
