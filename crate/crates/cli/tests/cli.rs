use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use heattrace_core::coefficients::{closed_form_b0_b1, CoefficientTable};
use heattrace_core::{Potential, QuadratureSpec};
use tempfile::TempDir;

const BUMP: &str = r#"
[potential]
family = "bump"
"#;

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn heattrace(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heattrace"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn coeffs_match_closed_forms() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", &format!("max_order = 1\n{BUMP}"));
    let out = dir.path().join("table.json");
    let o = heattrace(&["coeffs", "--out", out.to_str().unwrap()], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = CoefficientTable::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let spec = QuadratureSpec::default();
    let (b0, b1) = closed_form_b0_b1(&Potential::canonical(), &spec).unwrap();
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    assert!(rel(table.b(0).unwrap(), b0) < 1e-6);
    assert!(rel(table.b(1).unwrap(), b1) < 1e-6);
    let i1 = Potential::canonical().integrate_power(1, &spec).unwrap();
    assert!(rel(table.b(0).unwrap(), -i1 / (4.0 * PI)) < 1e-6);
}

#[test]
fn json_round_trip_is_bitwise() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", &format!("max_order = 3\n{BUMP}"));
    let o = heattrace(&["coeffs"], &cfg);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let loaded = CoefficientTable::from_json(&text).unwrap();
    let fresh =
        CoefficientTable::compute(&Potential::canonical(), 3, &QuadratureSpec::default()).unwrap();
    assert_eq!(loaded, fresh);
    for (a, b) in loaded.bm.iter().zip(&fresh.bm) {
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}

#[test]
fn zero_potential_gives_zero_coefficients() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "z.toml",
        "max_order = 3\n[potential]\nfamily = \"bump\"\namplitude = 0.0\n",
    );
    let o = heattrace(&["coeffs", "--format", "csv"], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&String::from_utf8_lossy(&o.stdout));
    assert_eq!(rows.len(), 10 + 4 + 4);
    for r in &rows {
        assert_eq!(r[3].parse::<f64>().unwrap(), 0.0, "{r:?}");
    }
}

#[test]
fn order_cap_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", &format!("max_order = 9\n{BUMP}"));
    let o = heattrace(&["coeffs"], &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("max_order: 9 exceeds the supported cap of 5"),
        "{}",
        stderr(&o)
    );
    assert!(o.stdout.is_empty());
}

#[test]
fn parse_errors_name_the_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.toml",
        "max_order = 1\n[potential]\nfamily = \"bump\"\nhalfwdith = 2.0\n",
    );
    let o = heattrace(&["coeffs"], &cfg);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("halfwdith") && err.contains("line 4"), "{err}");
}

#[test]
fn missing_config_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let o = heattrace(&["coeffs"], &dir.path().join("absent.toml"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_default_suite_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "v.toml", &format!("max_order = 2\n{BUMP}"));
    let o = heattrace(&["verify"], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let reports: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(reports.len(), 10 + 9 + 3 + 1);
    assert!(reports.iter().all(|r| r["passed"] == true));
}

#[test]
fn tightened_tolerances_fail_honestly() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        "max_order = 2\n{BUMP}\n[verify]\nfourier_tolerance = 1e-15\nk0_tolerance = 1e-15\nk0_k_values = [1.0]\nk0_separations = [0.5]\n"
    );
    let cfg = write_config(&dir, "v.toml", &body);
    let o = heattrace(&["verify", "--format", "csv"], &cfg);
    assert_eq!(o.status.code(), Some(3));
    let rows = csv_rows(&String::from_utf8_lossy(&o.stdout));
    let k0 = rows.iter().find(|r| &r[0] == "k0_product").unwrap();
    let diff: f64 = k0[5].parse().unwrap();
    assert!(diff > 1e-15 && diff < 1e-5, "{diff}");
    assert_eq!(&k0[7], "false");
    assert!(stderr(&o).contains("FAILED k0_product"));
}

#[test]
fn empty_grids_are_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "v.toml",
        &format!("max_order = 1\n{BUMP}\n[verify]\nk0_k_values = []\n"),
    );
    let o = heattrace(&["verify"], &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("grid is empty"));

    let cfg = write_config(&dir, "s.toml", &format!("max_order = 1\n{BUMP}"));
    let o = heattrace(&["scan"], &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("oracle.k_values"), "{}", stderr(&o));
}

#[test]
fn scan_zero_potential_is_all_zero() {
    let dir = TempDir::new().unwrap();
    let body = "max_order = 1\n[potential]\nfamily = \"bump\"\namplitude = 0.0\n[oracle]\nk_values = [10.0, 20.0]\n";
    let cfg = write_config(&dir, "z.toml", body);
    let o = heattrace(&["scan", "--format", "csv"], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&String::from_utf8_lossy(&o.stdout));
    assert_eq!(rows.len(), 2);
    for r in &rows {
        for col in 1..=5 {
            assert_eq!(r[col].parse::<f64>().unwrap(), 0.0, "{r:?}");
        }
        assert_eq!(&r[6], "ok");
    }
}

#[test]
fn scan_flags_rows_below_k_min() {
    let dir = TempDir::new().unwrap();
    let body = format!("max_order = 1\n{BUMP}\n[oracle]\nk_values = [5.0, 30.0]\nn_max = 1\n");
    let cfg = write_config(&dir, "s.toml", &body);
    let out = dir.path().join("scan.csv");
    let o = heattrace(
        &["scan", "--format", "csv", "--out", out.to_str().unwrap()],
        &cfg,
    );
    assert_eq!(o.status.code(), Some(2));
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(&rows[0][6], "below_k_min");
    assert!(rows[0][1].is_empty() && rows[0][3].is_empty());
    assert_eq!(&rows[1][6], "ok");

    let terms = csv_rows(&std::fs::read_to_string(dir.path().join("scan.terms.csv")).unwrap());
    let methods: Vec<&str> = terms.iter().map(|r| &r[4]).collect();
    assert_eq!(methods, ["closed_form", "reduced_integral"]);
    assert!(terms.iter().all(|r| &r[1] == "30.0"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        "max_order = 1\n{BUMP}\n[oracle]\nk_values = [20.0, 40.0]\nn_max = 1\nk_min_override = 10.0\n"
    );
    let cfg = write_config(&dir, "s.toml", &body);
    let mut outputs = Vec::new();
    for (cmd, threads) in [
        ("scan", "1"),
        ("scan", "3"),
        ("coeffs", "1"),
        ("coeffs", "2"),
    ] {
        let out = dir.path().join(format!("{cmd}-{threads}.csv"));
        let o = heattrace(
            &[
                cmd,
                "--threads",
                threads,
                "--format",
                "csv",
                "--out",
                out.to_str().unwrap(),
            ],
            &cfg,
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push(std::fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[2], outputs[3]);
}
