//! End-to-end checks of the binary: exit codes, output formats, the
//! negative control, and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_coulomb-edge");

const GINIBRE: &str = r#"{"potential": {"type": "radial-poly", "coeffs": [[1.0, 2]]}}"#;
const MIXED: &str = r#"{"potential": {"type": "radial-poly", "coeffs": [[1.0, 2], [1.0, 4]]}}"#;
const ELLIPTIC: &str = r#"{"potential": {"type": "elliptic", "tau": 0.5}}"#;

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

/// The value of a `# key,value` metadata line.
fn meta_value(csv: &str, key: &str) -> String {
    let prefix = format!("# {key},");
    csv.lines()
        .find_map(|line| line.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no metadata line for key '{key}' in:\n{csv}"))
        .to_string()
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .skip(1)
        .map(|line| line.split(',').map(|cell| cell.parse().unwrap()).collect())
        .collect()
}

#[test]
fn density_reports_the_closed_form_value_at_the_origin() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "gin.json",
        r#"{"potential": {"type": "radial-poly", "coeffs": [[1.0, 2]]}, "n_list": [1], "r_grid": [0.0]}"#,
    );
    let out = run(&["density", "--config", cfg.path_str()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = stdout_of(&out);
    assert!(csv.contains("\nr,R_n\n"), "{csv}");

    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.0);
    // one particle in the plane under Q = r^2 sits at unit height
    assert!((rows[0][1] - 1.0).abs() <= 1e-10, "{}", rows[0][1]);

    let defect: f64 = meta_value(&csv, "mass_rel_defect").parse().unwrap();
    assert!(defect <= 1e-8, "mass defect {defect}");
}

#[test]
fn density_default_grid_covers_the_droplet_and_beyond() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "gin.json", GINIBRE);
    let out = run(&["density", "--config", cfg.path_str(), "--n", "16"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = stdout_of(&out);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 61);
    assert_eq!(rows[0][0], 0.0);
    // grid reaches 1.5x the droplet radius, where the density has collapsed
    assert!((rows[60][0] - 1.5).abs() <= 1e-12);
    assert!(rows[60][1] < 1e-3 * rows[0][1]);
}

#[test]
fn density_handles_the_elliptic_potential() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "ell.json", ELLIPTIC);
    let out = run(&["density", "--config", cfg.path_str(), "--n", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = stdout_of(&out);
    assert_eq!(meta_value(&csv, "potential"), "elliptic(tau=0.5)");
    let defect: f64 = meta_value(&csv, "mass_rel_defect").parse().unwrap();
    assert!(defect <= 1e-6, "mass defect {defect}");
}

#[test]
fn unknown_potential_type_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"potential": {"type": "hexagonal"}}"#,
    );
    let out = run(&["density", "--config", cfg.path_str()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("error:"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = run(&["density", "--config", "/nonexistent/run.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("error:"));
}

#[test]
fn edge_check_confirms_residual_decay_on_a_wide_n_range() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "gin.json", GINIBRE);
    let out = run(&[
        "edge-check",
        "--config",
        cfg.path_str(),
        "--n",
        "16,256",
        "--t-min",
        "-1",
        "--t-max",
        "1",
        "--t-step",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = stdout_of(&out);
    assert_eq!(meta_value(&csv, "decay"), "true");
    let first: f64 = meta_value(&csv, "max_abs_gap_16").parse().unwrap();
    let last: f64 = meta_value(&csv, "max_abs_gap_256").parse().unwrap();
    assert!(last <= first / 2.0, "{first} -> {last}");
    // 5 t values per n, 9 numeric fields per row
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|row| row.len() == 9));
}

#[test]
fn edge_check_with_a_single_n_reports_no_decay_verdict() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "gin.json", GINIBRE);
    let out = run(&[
        "edge-check",
        "--config",
        cfg.path_str(),
        "--n",
        "64",
        "--t-min",
        "-1",
        "--t-max",
        "1",
        "--t-step",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = stdout_of(&out);
    assert!(meta_value(&csv, "decay").starts_with("none"));
}

#[test]
fn edge_check_warns_when_the_grid_leaves_the_smallest_window() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "gin.json", GINIBRE);
    let out = run(&[
        "edge-check",
        "--config",
        cfg.path_str(),
        "--n",
        "16,256",
        "--t-min",
        "-2",
        "--t-max",
        "2",
        "--t-step",
        "1",
    ]);
    // |t| = 2 exceeds sqrt(ln 16) but stays inside sqrt(ln 256)
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = stdout_of(&out);
    assert!(meta_value(&csv, "warning").contains("n = 16"));
}

#[test]
fn non_ascending_n_list_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "gin.json", GINIBRE);
    let out = run(&["edge-check", "--config", cfg.path_str(), "--n", "256,16"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("ascending"));
}

#[test]
fn fluct_check_closes_the_gap_for_smooth_test_functions() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "gin.json",
        r#"{"potential": {"type": "radial-poly", "coeffs": [[1.0, 2]]}, "f_list": ["r^2"]}"#,
    );
    let out = run(&["fluct-check", "--config", cfg.path_str(), "--n", "16,256"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = stdout_of(&out);
    assert_eq!(meta_value(&csv, "decay_r^2"), "true");
    let rho: f64 = meta_value(&csv, "rho_half_r^2").parse().unwrap();
    assert!((rho - 0.5).abs() <= 1e-10, "{rho}");
}

#[test]
fn unknown_test_function_label_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "gin.json",
        r#"{"potential": {"type": "radial-poly", "coeffs": [[1.0, 2]]}, "f_list": ["r^3"]}"#,
    );
    let out = run(&["fluct-check", "--config", cfg.path_str(), "--n", "16,256"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("unknown test function label"));
}

#[test]
fn fluct_check_rejects_elliptic_potentials() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "ell.json", ELLIPTIC);
    let out = run(&["fluct-check", "--config", cfg.path_str()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("radial-poly potentials only"));
}

#[test]
fn convergence_distance_decreases_with_n() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "gin.json", GINIBRE);
    let out = run(&[
        "convergence",
        "--config",
        cfg.path_str(),
        "--n",
        "64,256,1024",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = stdout_of(&out);
    assert_eq!(meta_value(&csv, "decreasing"), "true");
    let c: f64 = meta_value(&csv, "C").parse().unwrap();
    assert!((c + 0.132_980_760_133_810_9).abs() <= 1e-13, "{c}");
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 3);
    // gap column shrinks row over row
    assert!(rows[1][4] < rows[0][4] && rows[2][4] < rows[1][4]);
}

#[test]
fn oracle_verify_passes_and_its_negative_control_fails() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "mixed.json", MIXED);

    let out = run(&["oracle-verify", "--config", cfg.path_str()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = stdout_of(&out);
    let worst: f64 = meta_value(&csv, "max_rel_err").parse().unwrap();
    assert!(worst <= 1e-8, "max relative error {worst}");

    let corrupted = run(&[
        "oracle-verify",
        "--config",
        cfg.path_str(),
        "--corrupt-norms",
    ]);
    assert_eq!(corrupted.status.code(), Some(1));
    assert!(stderr_of(&corrupted).contains("check failed"));
    // the table is still written so the failure can be inspected
    let csv = stdout_of(&corrupted);
    assert_eq!(meta_value(&csv, "corrupt_norms"), "1e-6");
    let worst: f64 = meta_value(&csv, "max_rel_err").parse().unwrap();
    assert!(worst > 1e-8, "corruption went undetected: {worst}");
}

#[test]
fn oracle_verify_covers_the_elliptic_kernel() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "ell.json", ELLIPTIC);
    let out = run(&["oracle-verify", "--config", cfg.path_str()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = stdout_of(&out);
    assert_eq!(meta_value(&csv, "oracle_gate"), "passed");
    let worst: f64 = meta_value(&csv, "max_rel_err").parse().unwrap();
    assert!(worst <= 1e-7, "max relative error {worst}");

    let corrupted = run(&[
        "oracle-verify",
        "--config",
        cfg.path_str(),
        "--corrupt-norms",
    ]);
    assert_eq!(corrupted.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "mixed.json", MIXED);
    let args = ["density", "--config", cfg.path_str(), "--n", "16"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}

#[test]
fn json_output_mirrors_the_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "gin.json",
        r#"{"potential": {"type": "radial-poly", "coeffs": [[1.0, 2]]}, "n_list": [4], "r_grid": [0.0, 0.5, 1.0]}"#,
    );
    let json_path = dir.path().join("table.json");
    let out = run(&[
        "density",
        "--config",
        cfg.path_str(),
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    assert!(out.stdout.is_empty());

    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let meta = parsed["meta"].as_object().unwrap();
    assert_eq!(meta["command"], "density");
    assert_eq!(meta["potential"], "r^2");
    assert!(meta.contains_key("coulomb-edge"));
    assert!(meta.contains_key("mass"));
    let columns: Vec<&str> = parsed["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(columns, ["r", "R_n"]);
    let rows = parsed["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows
        .iter()
        .all(|row| row.as_array().unwrap().iter().all(|cell| cell.is_string())));
}

#[test]
fn config_out_path_is_used_and_the_flag_overrides_it() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "gin.json",
        r#"{"potential": {"type": "radial-poly", "coeffs": [[1.0, 2]]}, "n_list": [4], "r_grid": [0.5], "out": "from_config.csv"}"#,
    );

    let out = Command::new(BIN)
        .args(["density", "--config", cfg.path_str()])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(dir.path().join("from_config.csv")).unwrap();
    assert!(written.contains("\nr,R_n\n"));

    let flagged = Command::new(BIN)
        .args([
            "density",
            "--config",
            cfg.path_str(),
            "--out",
            "flagged.csv",
        ])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(flagged.status.code(), Some(0), "{}", stderr_of(&flagged));
    let override_file = std::fs::read_to_string(dir.path().join("flagged.csv")).unwrap();
    assert_eq!(override_file, written);
}

/// Convenience for passing temp paths to `run`.
trait PathStr {
    fn path_str(&self) -> &str;
}

impl PathStr for PathBuf {
    fn path_str(&self) -> &str {
        self.to_str().unwrap()
    }
}
