use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn opint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opint"))
        .args(args)
        .env_remove("OPINT_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

/// Row-major real matrix in the file format.
fn real(rows: usize, cols: usize, entries: &[f64]) -> Value {
    assert_eq!(entries.len(), rows * cols);
    let data: Vec<[f64; 2]> = entries.iter().map(|&x| [x, 0.0]).collect();
    json!({ "rows": rows, "cols": cols, "data": data })
}

fn complex_diag(entries: &[[f64; 2]]) -> Value {
    let n = entries.len();
    let mut data = vec![[0.0, 0.0]; n * n];
    for (i, e) in entries.iter().enumerate() {
        data[i * n + i] = *e;
    }
    json!({ "rows": n, "cols": n, "data": data })
}

fn scalar(x: f64) -> Value {
    real(1, 1, &[x])
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn write(&self, name: &str, value: &Value) -> PathBuf {
        self.write_raw(name, &value.to_string())
    }

    fn write_raw(&self, name: &str, text: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn matrix_entries(v: &Value) -> Vec<[f64; 2]> {
    v["data"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| [e[0].as_f64().unwrap(), e[1].as_f64().unwrap()])
        .collect()
}

#[test]
fn spectral_reports_clusters_with_multiplicities() {
    let ws = Workspace::new();
    let file = ws.write("c.json", &json!({ "C": complex_diag(&[[1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]) }));
    let out = opint(&["spectral", s(&file)]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    let mut pairs: Vec<([f64; 2], u64)> = report["clusters"]
        .as_array()
        .unwrap()
        .iter()
        .zip(report["multiplicities"].as_array().unwrap())
        .map(|(c, m)| ([c[0].as_f64().unwrap(), c[1].as_f64().unwrap()], m.as_u64().unwrap()))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    assert_eq!(pairs.len(), 2);
    assert!((pairs[0].0[0]).abs() < 1e-12 && (pairs[0].0[1] - 1.0).abs() < 1e-12);
    assert_eq!(pairs[0].1, 2);
    assert!((pairs[1].0[0] - 1.0).abs() < 1e-12 && pairs[1].0[1].abs() < 1e-12);
    assert_eq!(pairs[1].1, 1);
    assert!(report["max_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn spectral_rejects_non_normal_input() {
    let ws = Workspace::new();
    let file = ws.write("c.json", &json!({ "C": real(2, 2, &[1.0, 1.0, 0.0, 1.0]) }));
    let out = opint(&["spectral", s(&file)]);
    assert_eq!(code(&out), 3);
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_input_is_a_usage_error() {
    let ws = Workspace::new();
    let file = ws.write_raw("bad.json", "{ \"C\": [1, 2");
    assert_eq!(code(&opint(&["spectral", s(&file)])), 2);

    let wrong_count = ws.write("count.json", &json!({ "C": { "rows": 2, "cols": 2, "data": [[1.0, 0.0]] } }));
    assert_eq!(code(&opint(&["spectral", s(&wrong_count)])), 2);

    let missing = ws.dir.path().join("missing.json");
    assert_eq!(code(&opint(&["spectral", s(&missing)])), 2);
}

#[test]
fn unknown_fields_and_bad_tolerances_are_rejected() {
    let ws = Workspace::new();
    let extra = ws.write("extra.json", &json!({ "C": scalar(1.0), "Q": scalar(1.0) }));
    assert_eq!(code(&opint(&["spectral", s(&extra)])), 2);
    let tol = ws.write("tol.json", &json!({ "C": scalar(1.0), "tolerances": { "tol_solve": 2.0 } }));
    assert_eq!(code(&opint(&["spectral", s(&tol)])), 2);
}

#[test]
fn sylvester_scalar_every_method() {
    let ws = Workspace::new();
    let file = ws.write("s.json", &json!({ "A": scalar(2.0), "C": scalar(0.0), "D": scalar(1.0) }));
    for method in ["spectral", "contour", "kronecker", "double"] {
        let out = opint(&["sylvester", s(&file), "--method", method]);
        assert_eq!(code(&out), 0, "{method}: {}", String::from_utf8_lossy(&out.stderr));
        let report = stdout_json(&out);
        let x = matrix_entries(&report["x"]);
        assert!((x[0][0] - 0.5).abs() < 1e-12 && x[0][1].abs() < 1e-12, "{method}: {x:?}");
        let reported = if method == "double" { "double_spectral" } else { method };
        assert_eq!(report["method"], reported);
        for (name, check) in report["bounds"].as_object().unwrap() {
            assert_eq!(check["status"], "pass", "{method} {name}");
        }
    }
}

#[test]
fn sylvester_failures_map_to_exit_codes() {
    let ws = Workspace::new();
    let zero_gap = ws.write("gap.json", &json!({ "A": scalar(1.0), "C": scalar(1.0), "D": scalar(1.0) }));
    assert_eq!(code(&opint(&["sylvester", s(&zero_gap)])), 3);

    let a = real(2, 2, &[3.0, 1.0, 0.0, 3.0]);
    let non_normal_a = ws.write(
        "nn.json",
        &json!({ "A": a, "C": real(2, 2, &[0.0, 0.0, 0.0, 1.0]), "D": real(2, 2, &[1.0, 0.0, 0.0, 1.0]) }),
    );
    assert_eq!(code(&opint(&["sylvester", s(&non_normal_a), "--method", "double"])), 3);
    assert_eq!(code(&opint(&["sylvester", s(&non_normal_a), "--method", "spectral"])), 0);

    let shapes = ws.write("shape.json", &json!({ "A": scalar(2.0), "C": scalar(0.0), "D": real(1, 2, &[1.0, 1.0]) }));
    assert_eq!(code(&opint(&["sylvester", s(&shapes)])), 2);
}

#[test]
fn riccati_scalar_converges_to_known_root() {
    let ws = Workspace::new();
    let file = ws.write(
        "r.json",
        &json!({ "A": scalar(3.0), "B": scalar(1.0), "C": scalar(0.0), "D": scalar(1.0) }),
    );
    let out = opint(&["riccati", s(&file)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["converged"], true);
    let x = matrix_entries(&report["x"])[0];
    assert!((x[0] - (13f64.sqrt() - 3.0) / 2.0).abs() < 1e-12);
    assert!(x[1].abs() < 1e-12);
    assert!((x[0] - 0.3027756).abs() < 1e-7);
    assert_eq!(report["certificate"]["condition_ok"], true);
    for (name, check) in report["posterior"].as_object().unwrap() {
        assert_eq!(check["status"], "pass", "{name}");
    }
}

#[test]
fn riccati_uncertified_prints_certificate_and_exits_3() {
    let ws = Workspace::new();
    let file = ws.write(
        "r.json",
        &json!({ "A": scalar(1.0), "B": scalar(1.0), "C": scalar(0.0), "D": scalar(1.0) }),
    );
    let out = opint(&["riccati", s(&file)]);
    assert_eq!(code(&out), 3);
    let report = stdout_json(&out);
    assert_eq!(report["certificate"]["condition_ok"], false);

    let zero_b = ws.write(
        "zb.json",
        &json!({ "A": scalar(3.0), "B": scalar(0.0), "C": scalar(0.0), "D": scalar(1.0) }),
    );
    assert_eq!(code(&opint(&["riccati", s(&zero_b)])), 3);
}

#[test]
fn riccati_override_reports_iterations() {
    let ws = Workspace::new();
    // d = 1 and ‖B‖‖D‖ = 0.3 > d²/4, so the certificate fails.
    let file = ws.write(
        "r.json",
        &json!({ "A": scalar(1.0), "B": scalar(0.3), "C": scalar(0.0), "D": scalar(1.0) }),
    );
    let out = opint(&["riccati", s(&file)]);
    assert_eq!(code(&out), 3);
    let out = opint(&["riccati", s(&file), "--override-certificate", "--max-iter", "500"]);
    let report = stdout_json(&out);
    assert_eq!(report["certificate"]["condition_ok"], false);
    assert!(report["iterations"].as_u64().unwrap() > 0);
}

#[test]
fn integrate_affine_refines_and_reports_csv() {
    let ws = Workspace::new();
    let file = ws.write(
        "i.json",
        &json!({
            "C": complex_diag(&[[1.0, 0.0], [0.0, 1.0]]),
            "rect": { "a": -0.5, "b": 1.5, "c": -0.5, "d": 1.5 },
        }),
    );
    let out = opint(&["integrate", s(&file), "--function", "affine:1,2", "--grid-levels", "8", "--format", "csv"]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "level,m,n,mesh,diff_prev,err_vs_exact");
    let rows: Vec<Vec<&str>> = lines[1..].iter().filter(|l| !l.starts_with('#')).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.len() == 6));
    assert_eq!(rows[0][4], "");
    let errs: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    // first-order refinement: the error halves per level once the grid resolves the spectrum
    for w in errs[2..].windows(2) {
        assert!(w[1] < 0.6 * w[0], "{errs:?}");
    }
    assert!(lines.last().unwrap().starts_with('#'));
    assert!(matches!(code(&out), 0 | 4));
}

#[test]
fn integrate_constant_and_resolvent() {
    let ws = Workspace::new();
    let file = ws.write(
        "i.json",
        &json!({
            "C": complex_diag(&[[1.0, 0.0], [0.0, 1.0]]),
            "A": complex_diag(&[[3.0, 0.0], [0.0, 3.0]]),
            "D": real(1, 2, &[1.0, 2.0]),
            "rect": { "a": -0.5, "b": 1.5, "c": -0.5, "d": 1.5 },
        }),
    );
    let out = opint(&["integrate", s(&file), "--function", "poly:1", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert_eq!(report["converged"], true);
    let levels = report["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 2);
    assert!(levels.iter().all(|l| l["err_vs_exact"].as_f64().unwrap() < 1e-14));

    let out = opint(&["integrate", s(&file), "--function", "resolvent:A,D", "--tol", "1e-10", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    let last = report["levels"].as_array().unwrap().last().unwrap().clone();
    assert!(last["err_vs_exact"].as_f64().unwrap() <= 1e-8);

    let out = opint(&["integrate", s(&file), "--function", "nonsense:1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn integrate_without_rect_is_rejected() {
    let ws = Workspace::new();
    let file = ws.write("i.json", &json!({ "C": scalar(1.0) }));
    assert_eq!(code(&opint(&["integrate", s(&file), "--function", "poly:1", "--format", "json"])), 2);
}

#[test]
fn enorm_of_diagonal_pair() {
    let ws = Workspace::new();
    let file = ws.write(
        "e.json",
        &json!({ "Y": real(2, 2, &[3.0, 0.0, 0.0, 4.0]), "C": real(2, 2, &[0.0, 0.0, 0.0, 1.0]) }),
    );
    let out = opint(&["enorm", s(&file)]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert!((report["op_norm"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert!((report["e_norm"].as_f64().unwrap() - 5.0).abs() < 1e-12);
    assert!((report["hs_norm"].as_f64().unwrap() - 5.0).abs() < 1e-12);
    assert_eq!(report["sandwich_holds"], true);

    let zero = ws.write("z.json", &json!({ "Y": real(2, 2, &[0.0; 4]), "C": real(2, 2, &[0.0, 0.0, 0.0, 1.0]) }));
    let report = stdout_json(&opint(&["enorm", s(&zero)]));
    for key in ["op_norm", "e_norm", "hs_norm"] {
        assert_eq!(report[key].as_f64().unwrap(), 0.0);
    }

    let mismatch = ws.write("m.json", &json!({ "Y": real(3, 3, &[1.0; 9]), "C": real(2, 2, &[0.0, 0.0, 0.0, 1.0]) }));
    assert_eq!(code(&opint(&["enorm", s(&mismatch)])), 2);
}

#[test]
fn report_matrix_round_trips_to_same_residual() {
    let ws = Workspace::new();
    let out_path = ws.dir.path().join("gen.json");
    assert_eq!(code(&opint(&["generate", "sylvester", "--seed", "11", "--dim", "4", "-o", s(&out_path)])), 0);
    let problem: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(problem["seed"], 11);

    let report_path = ws.dir.path().join("report.json");
    let out = opint(&["sylvester", s(&out_path), "-o", s(&report_path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["seed"], 11);

    // Residual of the written X against the written problem.
    let a = to_rows(&problem["A"]);
    let c = to_rows(&problem["C"]);
    let d = to_rows(&problem["D"]);
    let x = to_rows(&report["x"]);
    let r = sub(&sub(&mul(&x, &a), &mul(&c, &x)), &d);
    let residual = r.iter().flatten().map(|z| z.0 * z.0 + z.1 * z.1).sum::<f64>().sqrt();
    let reported = report["residual"].as_f64().unwrap();
    let scale = report["residual_scale"].as_f64().unwrap();
    assert!((residual - reported).abs() <= 1e-12 * scale.max(1.0), "{residual} vs {reported}");
}

type Rows = Vec<Vec<(f64, f64)>>;

fn to_rows(v: &Value) -> Rows {
    let rows = v["rows"].as_u64().unwrap() as usize;
    let cols = v["cols"].as_u64().unwrap() as usize;
    let e = matrix_entries(v);
    (0..rows).map(|i| (0..cols).map(|j| (e[i * cols + j][0], e[i * cols + j][1])).collect()).collect()
}

fn mul(a: &Rows, b: &Rows) -> Rows {
    let inner = b.len();
    (0..a.len())
        .map(|i| {
            (0..b[0].len())
                .map(|j| {
                    (0..inner).fold((0.0, 0.0), |acc, k| {
                        let (p, q) = (a[i][k], b[k][j]);
                        (acc.0 + p.0 * q.0 - p.1 * q.1, acc.1 + p.0 * q.1 + p.1 * q.0)
                    })
                })
                .collect()
        })
        .collect()
}

fn sub(a: &Rows, b: &Rows) -> Rows {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x.0 - y.0, x.1 - y.1)).collect())
        .collect()
}

#[test]
fn csv_is_only_for_integrate() {
    let ws = Workspace::new();
    let file = ws.write("c.json", &json!({ "C": scalar(1.0) }));
    assert_eq!(code(&opint(&["spectral", s(&file), "--format", "csv"])), 2);
    assert_eq!(code(&opint(&["spectral", s(&file), "--format", "json"])), 0);
}

#[test]
fn invalid_thread_count_is_a_usage_error() {
    let ws = Workspace::new();
    let file = ws.write("c.json", &json!({ "C": scalar(1.0) }));
    let out = Command::new(env!("CARGO_BIN_EXE_opint"))
        .args(["spectral", s(&file)])
        .env("OPINT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(code(&opint(&["frobnicate"])), 2);
}
