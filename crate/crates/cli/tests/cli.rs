use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tomocheck::io::{read_grid_json, read_samples_csv, read_wigner_json};

fn tomocheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tomocheck"))
        .args(args)
        .output()
        .expect("run tomocheck")
}

fn code(args: &[&str]) -> i32 {
    tomocheck(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".provenance.json");
    PathBuf::from(name)
}

#[test]
fn generate_writes_valid_grid_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("vac.json");
    assert_eq!(code(&["generate", "--preset", "vacuum", "--thetas", "48", "--x-range", "-7:7:281", "--out", s(&out)]), 0);
    let grid = read_grid_json(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(grid.thetas().len(), 48);
    assert_eq!(grid.xs().len(), 281);
    assert!(grid.validate(1e-6).into_result().is_ok());
    let doc = json(&out);
    assert_eq!(doc["provenance"]["command"], "generate");
    assert_eq!(doc["provenance"]["config"]["x_range"]["points"], 281);
}

#[test]
fn number_state_grid_is_phase_independent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fock.json");
    assert_eq!(code(&["generate", "--preset", "fock", "--n", "1", "--out", s(&out)]), 0);
    let grid = read_grid_json(std::fs::File::open(&out).unwrap()).unwrap();
    for row in grid.rows() {
        for (a, b) in row.iter().zip(grid.row(0)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn unphysical_spec_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    std::fs::write(&spec, r#"{"kind":"gaussian","sigma_qq":0.4,"sigma_pp":0.5,"sigma_qp":0.0}"#).unwrap();
    let out = tomocheck(&["generate", "--spec", s(&spec), "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("physicality"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&["generate"]), 2);
    assert_eq!(code(&["generate", "--preset", "vacuum", "--r", "0.5"]), 2);
    assert_eq!(code(&["generate", "--preset", "fock"]), 2);
    assert_eq!(code(&["generate", "--preset", "vacuum", "--spec", "x.json"]), 2);
    assert_eq!(code(&["generate", "--preset", "vacuum", "--x-range", "3:1:10"]), 2);
    assert_eq!(code(&["sample", "--preset", "vacuum", "--n", "10"]), 2);
    assert_eq!(code(&["check", "--input", "/nonexistent/grid.json"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn sampling_is_deterministic_and_counts_records() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |out: &Path| {
        vec![
            "sample".to_string(),
            "--preset".into(),
            "vacuum".into(),
            "--phases".into(),
            "0,0.7853981633974483,1.5707963267948966".into(),
            "--n".into(),
            "100000".into(),
            "--seed".into(),
            "42".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    for out in [&a, &b] {
        let args = args(out);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(code(&args), 0);
    }
    let bytes_a = std::fs::read(&a).unwrap();
    assert_eq!(bytes_a, std::fs::read(&b).unwrap());
    let text = String::from_utf8(bytes_a).unwrap();
    assert_eq!(text.lines().count(), 300_001);
    assert!(text.starts_with("theta,x\n"));
    let prov = json(&sidecar(&a));
    assert_eq!(prov["provenance"]["config"]["plan"]["seed"], 42);
    assert!(prov["provenance"]["config"]["rng"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn detector_noise_shifts_variance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("noisy.csv");
    assert_eq!(
        code(&["sample", "--preset", "vacuum", "--phases", "0", "--n", "100000", "--noise-sigma", "0.3", "--seed", "3", "--out", s(&out)]),
        0
    );
    let set = read_samples_csv(std::fs::File::open(&out).unwrap(), "noisy").unwrap();
    let xs = set.phase_values(0.0, 1e-6).unwrap();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let se = (2.0 * 0.59f64 * 0.59 / n).sqrt();
    assert!((var - 0.59).abs() < 3.0 * se, "variance {var}");
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let vac = dir.path().join("vac.json");
    let thermal = dir.path().join("thermal.json");
    assert_eq!(code(&["generate", "--preset", "vacuum", "--out", s(&vac)]), 0);
    assert_eq!(code(&["generate", "--preset", "thermal", "--nbar", "1", "--x-range", "-10:10:401", "--out", s(&thermal)]), 0);

    let report = dir.path().join("r.json");
    assert_eq!(code(&["check", "--input", s(&vac), "--out", s(&report)]), 0);
    let r = json(&report);
    assert!((r["heisenberg"]["product"].as_f64().unwrap() - 0.25).abs() < 1e-9);
    assert!(r["f_curve"].as_array().unwrap().iter().all(|p| p["f"].as_f64().unwrap().abs() < 1e-9));
    assert_eq!(r["provenance"]["command"], "check");
    assert_eq!(r["cross_check"]["identical"], true);

    assert_eq!(code(&["check", "--input", s(&thermal), "--out", s(&report)]), 0);
    let r = json(&report);
    assert!(r["f_curve"].as_array().unwrap().iter().all(|p| (p["f"].as_f64().unwrap() - 2.0).abs() < 1e-6));

    // three phases, none at π/2 → required phase missing
    let sparse = dir.path().join("sparse.json");
    std::fs::write(
        &sparse,
        format!(
            r#"{{"thetas":[0.0,0.3,0.6],"xs":{xs},"w":[{row},{row},{row}]}}"#,
            xs = serde_json::to_string(&tomocheck::tomogram::default_xs()).unwrap(),
            row = serde_json::to_string(
                &tomocheck::tomogram::default_xs()
                    .iter()
                    .map(|&x| tomocheck::state::normal_density(x, 0.0, 0.5))
                    .collect::<Vec<_>>()
            )
            .unwrap()
        ),
    )
    .unwrap();
    assert_eq!(code(&["check", "--input", s(&sparse), "--out", s(&report)]), 2);

    let malformed = dir.path().join("malformed.json");
    std::fs::write(&malformed, "{\"thetas\": [0.0]").unwrap();
    assert_eq!(code(&["check", "--input", s(&malformed)]), 2);
}

#[test]
fn csv_report_has_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let vac = dir.path().join("vac.json");
    assert_eq!(code(&["generate", "--preset", "vacuum", "--out", s(&vac)]), 0);
    let out = dir.path().join("f.csv");
    assert_eq!(code(&["check", "--input", s(&vac), "--scan", "12", "--format", "csv", "--out", s(&out)]), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("theta,f,se,pass\n"));
    assert_eq!(text.lines().count(), 13);
    assert_eq!(json(&sidecar(&out))["provenance"]["command"], "check");
}

#[test]
fn pipeline_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.csv");
    let mut reports = Vec::new();
    for _ in 0..2 {
        assert_eq!(
            code(&["sample", "--preset", "squeezed", "--r", "0.3", "--thetas", "12", "--n", "20000", "--seed", "5", "--out", s(&samples)]),
            0
        );
        let raw = dir.path().join("raw.json");
        let hist = dir.path().join("hist.json");
        let c = code(&["check", "--input", s(&samples), "--replicates", "50", "--seed", "1", "--out", s(&raw)]);
        assert!(c == 0 || c == 1);
        let c = code(&["check", "--input", s(&samples), "--histogram", "12", "--out", s(&hist)]);
        assert!(c == 0 || c == 1);
        reports.push((std::fs::read(&raw).unwrap(), std::fs::read(&hist).unwrap()));
    }
    assert_eq!(reports[0], reports[1]);
    let r = json(&dir.path().join("raw.json"));
    assert_eq!(r["f_curve"].as_array().unwrap().len(), 12);
    assert_eq!(r["provenance"]["config"]["input_kind"], "samples");
}

#[test]
fn wigner_reconstructions() {
    let dir = tempfile::tempdir().unwrap();
    let vac = dir.path().join("vac.json");
    let fock = dir.path().join("fock.json");
    assert_eq!(code(&["generate", "--preset", "vacuum", "--out", s(&vac)]), 0);
    assert_eq!(code(&["generate", "--preset", "fock", "--n", "1", "--out", s(&fock)]), 0);

    let w = dir.path().join("w.json");
    let slice = dir.path().join("slice.csv");
    assert_eq!(
        code(&["wigner", "--input", s(&vac), "--q-range", "-1:1:21", "--p-range", "-1:1:21", "--out", s(&w), "--slice", s(&slice)]),
        0
    );
    let grid = read_wigner_json(std::fs::File::open(&w).unwrap()).unwrap();
    assert!((grid.value_at(0.0, 0.0) - 2.0).abs() < 0.02);
    assert_eq!(json(&w)["provenance"]["command"], "wigner");
    assert_eq!(json(&w)["normalization"], "integral_equals_2pi");
    let slice_text = std::fs::read_to_string(&slice).unwrap();
    assert!(slice_text.starts_with("q,w\n"));
    assert_eq!(slice_text.lines().count(), 22);
    assert!(sidecar(&slice).exists());

    assert_eq!(code(&["wigner", "--input", s(&fock), "--out", s(&w)]), 0);
    let grid = read_wigner_json(std::fs::File::open(&w).unwrap()).unwrap();
    assert!(grid.min_value() < -1.9);

    let coarse = dir.path().join("coarse.json");
    assert_eq!(code(&["generate", "--preset", "vacuum", "--thetas", "3", "--out", s(&coarse)]), 0);
    let out = tomocheck(&["wigner", "--input", s(&coarse), "--out", s(&w)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("insufficient angles"));
}
