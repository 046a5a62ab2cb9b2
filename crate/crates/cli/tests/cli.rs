use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pisep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pisep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = pisep(args);
    assert!(
        out.status.success(),
        "pisep {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn gen(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", path.to_str().unwrap()]);
    ok(&full);
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_is_deterministic() {
    let a = ok(&["gen", "random-pure", "4", "--seed", "7"]).stdout;
    let b = ok(&["gen", "random-pure", "4", "--seed", "7"]).stdout;
    assert_eq!(a, b);
    let c = ok(&["gen", "random-pure", "4", "--seed", "8"]).stdout;
    assert_ne!(a, c);
    let m1 = ok(&["gen", "random-mixed", "3", "--seed", "1"]).stdout;
    assert_eq!(m1, ok(&["gen", "random-mixed", "3", "--seed", "1"]).stdout);
    let w = json(&ok(&["gen", "w", "3"]));
    assert_eq!(w["kind"], "pure");
    assert_eq!(w["n_qubits"], 3);
    assert_eq!(w["data"][1][0].as_f64().unwrap(), 1.0 / 3f64.sqrt());
}

#[test]
fn dense_cap_is_a_validation_error() {
    let out = pisep(&["gen", "ghz", "13"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("N = 13"));
}

#[test]
fn io_errors_exit_with_four() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(pisep(&["certify", s(&missing)]).status.code(), Some(4));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(pisep(&["certify", s(&bad)]).status.code(), Some(4));
    let unnormalized = dir.path().join("unnormalized.json");
    std::fs::write(
        &unnormalized,
        r#"{"n_qubits":1,"kind":"pure","data":[[1,0],[1,0]]}"#,
    )
    .unwrap();
    assert_eq!(pisep(&["certify", s(&unnormalized)]).status.code(), Some(2));
}

#[test]
fn certify_examples() {
    let dir = TempDir::new().unwrap();
    let w3 = gen(&dir, "w3.json", &["w", "3"]);
    let r = json(&ok(&["certify", s(&w3)]));
    assert!((r["k_eff"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r["verdicts"]["2"], "K_NONSEPARABLE");
    assert_eq!(r["verdicts"]["3"], "K_NONSEPARABLE");

    let ghz3 = gen(&dir, "ghz3.json", &["ghz", "3"]);
    let r = json(&ok(&["certify", s(&ghz3)]));
    assert!(r["k_eff"].is_null());
    assert!(r["note"].is_string());
    assert_eq!(r["verdicts"]["2"], "NOT_DETECTED");
    assert_eq!(r["verdicts"]["3"], "NOT_DETECTED");
}

#[test]
fn basis_search_finds_the_hidden_bell_pair() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bell_i.json");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let doc = serde_json::json!({"n_qubits": 2, "kind": "pure", "data": [[0.0, 0.0], [h, 0.0], [0.0, h], [0.0, 0.0]]});
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = ok(&["certify", s(&path), "--basis-search", "50", "1"]);
    let r = json(&out);
    assert_eq!(r["identity_basis"]["verdicts"]["2"], "NOT_DETECTED");
    assert_eq!(r["best_basis"]["verdicts"]["2"], "K_NONSEPARABLE");
    assert!(r["best_basis"]["k_eff"].as_f64().unwrap() <= 1.0 + 1e-6);
    assert_eq!(r["best_angles"].as_array().unwrap().len(), 2);
    assert_eq!(
        out.stdout,
        ok(&["certify", s(&path), "--basis-search", "50", "1"]).stdout
    );
}

#[test]
fn certify_routes_agree_on_pi_states() {
    let dir = TempDir::new().unwrap();
    let mixed = gen(&dir, "m4.json", &["random-mixed", "4", "--seed", "11"]);
    let pi = dir.path().join("pi4.json");
    let out = ok(&["project", s(&mixed), "-o", s(&pi)]);
    assert!(stderr(&out).contains("distance to PI part"));
    let dense = json(&ok(&["certify", s(&pi), "--via", "dense"]));
    for via in ["coeffs", "reconstruct"] {
        let other = json(&ok(&["certify", s(&pi), "--via", via]));
        for key in ["A", "B", "C", "k_eff"] {
            let (a, b) = (dense[key].as_f64().unwrap(), other[key].as_f64().unwrap());
            assert!((a - b).abs() < 1e-9, "{via} {key}: {a} vs {b}");
        }
        assert_eq!(dense["verdicts"], other["verdicts"]);
    }
    let coeffs = dir.path().join("c4.json");
    ok(&["coeffs", s(&pi), "-o", s(&coeffs)]);
    let from_file = json(&ok(&["certify", s(&coeffs), "--via", "coeffs"]));
    assert!((from_file["A"].as_f64().unwrap() - dense["A"].as_f64().unwrap()).abs() < 1e-12);
    assert_eq!(
        pisep(&["certify", s(&coeffs), "--via", "dense"])
            .status
            .code(),
        Some(2)
    );
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn scan_noise_rows() {
    let out = ok(&["scan-noise", "3,8,11,16", "0:1:0.01"]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().next(), Some("N,p,A,B,C,k_eff,detected_k2"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 4 * 101);
    for r in &rows {
        let (n, p): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        let k: f64 = r[5].parse().unwrap();
        let two_n = 2f64.powf(n);
        let closed = (two_n - (two_n + n - 2.0 * n * n) * p) / (two_n + (n - two_n) * p);
        assert!((k - closed).abs() < 1e-10, "N = {n}, p = {p}");
        if p == 0.0 {
            assert!((k - 1.0).abs() < 1e-12);
        }
    }
    let half = rows.iter().find(|r| r[0] == "3" && r[1] == "0.5").unwrap();
    assert!((half[5].parse::<f64>().unwrap() - 23.0 / 11.0).abs() < 1e-12);
    assert_eq!(half[6], "false");
    assert!(rows
        .iter()
        .any(|r| r[0] == "16" && r[1] == "0.99" && r[6] == "true"));
    assert_eq!(
        out.stdout,
        ok(&["scan-noise", "3,8,11,16", "0:1:0.01"]).stdout
    );

    let dir = TempDir::new().unwrap();
    let file = dir.path().join("fig1.csv");
    ok(&["scan-noise", "3", "0:1:0.5", s(&file), "--closed-form-only"]);
    assert_eq!(csv_rows(&std::fs::read_to_string(&file).unwrap()).len(), 3);
    assert_eq!(
        pisep(&["scan-noise", "3", "0:2:0.5"]).status.code(),
        Some(2)
    );
}

#[test]
fn reconstruct_exact_matches_coefficients() {
    let dir = TempDir::new().unwrap();
    let mixed = gen(&dir, "m5.json", &["random-mixed", "5", "--seed", "5"]);
    let pi = dir.path().join("pi5.json");
    ok(&["project", s(&mixed), "-o", s(&pi)]);
    let truth = json(&ok(&["coeffs", s(&pi)]));
    let out = ok(&["reconstruct", s(&pi)]);
    let rec = json(&out);
    assert_eq!(rec["condition_numbers"].as_array().unwrap().len(), 10);
    let lookup = |doc: &Value, k: &Value, l: &Value, m: &Value, n: &Value| {
        doc["coeffs"]
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["k"] == *k && e["l"] == *l && e["m"] == *m && e["n"] == *n)
            .map_or(0.0, |e| e["e"].as_f64().unwrap())
    };
    let entries = rec["coeffs"].as_array().unwrap();
    assert_eq!(entries.len(), 5 * 5 + 2 * 5 + 1);
    for e in entries {
        let want = lookup(&truth, &e["k"], &e["l"], &e["m"], &e["n"]);
        assert!((e["e"].as_f64().unwrap() - want).abs() < 1e-10);
    }
    let log = stderr(&out);
    assert!(log.contains("condition numbers") && log.contains("residuals"));
}

#[test]
fn reconstruct_sampled_within_five_sigma() {
    let dir = TempDir::new().unwrap();
    let w3 = gen(&dir, "w3.json", &["w", "3"]);
    let args = ["reconstruct", s(&w3), "--shots", "1000000", "--seed", "3"];
    let out = ok(&args);
    assert!(stderr(&out).contains("within 5σ: true"), "{}", stderr(&out));
    let rec = json(&out);
    assert_eq!(rec["standard_errors"].as_array().unwrap().len(), 3 * 3 - 2);
    assert_eq!(out.stdout, ok(&args).stdout);
}

#[test]
fn supplement_preset_lists_seven_observables() {
    let dir = TempDir::new().unwrap();
    let w3 = gen(&dir, "w3.json", &["w", "3"]);
    let out = ok(&["reconstruct", s(&w3), "--preset", "supplement"]);
    let log = stderr(&out);
    assert!(log.contains("7 settings"));
    for obs in [
        "1.000000·σz",
        "1.000000·σx",
        "1.000000·σy",
        "0.707107·σy - 0.707107·σz",
        "0.707107·σx + 0.707107·σz",
    ] {
        assert!(log.contains(obs), "missing {obs} in {log}");
    }
    let w4 = gen(&dir, "w4.json", &["w", "4"]);
    assert_eq!(
        pisep(&["reconstruct", s(&w4), "--preset", "supplement"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn concurrence_examples() {
    let dir = TempDir::new().unwrap();
    let ghz3 = gen(&dir, "ghz3.json", &["ghz", "3"]);
    let r = json(&ok(&["concurrence", s(&ghz3), "2"]));
    assert!((r["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r["partition"], "{0,1}|{2}");

    let product = gen(&dir, "product4.json", &["product", "4"]);
    let r = json(&ok(&["concurrence", s(&product), "3"]));
    assert!(r["value"].as_f64().unwrap().abs() < 1e-12);

    let w3 = gen(&dir, "w3.json", &["w", "3"]);
    let r = json(&ok(&["concurrence", s(&w3), "2"]));
    assert!((r["value"].as_f64().unwrap() - 8f64.sqrt() / 3.0).abs() < 1e-12);

    let mixed = gen(&dir, "m3.json", &["random-mixed", "3"]);
    let out = pisep(&["concurrence", s(&mixed), "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unsupported input"));

    // a density file of a pure state is accepted
    let pure_density = dir.path().join("w3_density.json");
    ok(&["project", s(&w3), "-o", s(&pure_density)]);
    let r = json(&ok(&["concurrence", s(&pure_density), "2"]));
    assert!((r["value"].as_f64().unwrap() - 8f64.sqrt() / 3.0).abs() < 1e-10);
}
