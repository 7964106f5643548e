//! End-to-end runs of the command line through `cli::run`.

use std::fs;
use std::path::{Path, PathBuf};

use cdklab::cli::run;
use tempfile::TempDir;

fn model(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("models")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn cdklab(args: &[&str]) -> i32 {
    run(std::iter::once("cdklab").chain(args.iter().copied()))
}

fn run_to_file(dir: &TempDir, file: &str, args: &[&str]) -> (i32, String) {
    let out: PathBuf = dir.path().join(file);
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_string_lossy().into_owned();
    full.extend(["--out", &out_str]);
    let code = cdklab(&full);
    (code, fs::read_to_string(&out).unwrap_or_default())
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(cdklab(&["--help"]), 0);
    assert_eq!(cdklab(&["--version"]), 0);
}

#[test]
fn bad_arguments_are_configuration_errors() {
    assert_eq!(cdklab(&["frobnicate"]), 2);
    assert_eq!(
        cdklab(&[
            "poly",
            "--model",
            "/nonexistent/model.json",
            "--x",
            "0",
            "--n",
            "3"
        ]),
        2
    );
    let m = model("chebyshev-like.json");
    assert_eq!(
        cdklab(&["kernel", "--model", &m, "--n", "10,5", "--x", "0", "--y", "0"]),
        2
    );
    assert_eq!(cdklab(&["suite", "--only", "99"]), 2);
}

#[test]
fn bands_of_the_constant_model() {
    let dir = TempDir::new().unwrap();
    let (code, csv) = run_to_file(
        &dir,
        "bands.csv",
        &["bands", "--model", &model("chebyshev-like.json")],
    );
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 1);
    assert!(
        (rows[0][1] + 2.0).abs() < 1e-12 && (rows[0][2] - 2.0).abs() < 1e-12,
        "{rows:?}"
    );
}

#[test]
fn poly_values_come_out_as_json() {
    let dir = TempDir::new().unwrap();
    let (code, text) = run_to_file(
        &dir,
        "poly.json",
        &[
            "poly",
            "--model",
            &model("alternating-diagonal.json"),
            "--x",
            "0",
            "--n",
            "4",
            "--format",
            "json",
        ],
    );
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v.to_string().contains("-0.7071067811865"), "{text}");
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = TempDir::new().unwrap();
    let m = model("sqrt-modulated.json");
    let args = [
        "ratio",
        "--model",
        &m,
        "--n",
        "100,1000",
        "--x",
        "-0.5,0,0.5",
    ];
    let (c1, a) = run_to_file(&dir, "a.csv", &args);
    let (c2, b) = run_to_file(&dir, "b.csv", &args);
    assert_eq!((c1, c2), (0, 0));
    assert!(!a.is_empty());
    assert_eq!(a, b);

    let suite = ["suite", "--only", "1,4", "--seed", "17"];
    let (c1, a) = run_to_file(&dir, "s1.csv", &suite);
    let (c2, b) = run_to_file(&dir, "s2.csv", &suite);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
}

#[test]
fn density_inside_a_gap_is_a_numerical_failure() {
    assert_eq!(
        cdklab(&["density", "--model", &model("blend.json"), "--x", "0"]),
        1
    );
}

#[test]
fn suite_reports_failures_through_the_exit_code() {
    assert_eq!(cdklab(&["suite", "--only", "1"]), 0);
    assert_eq!(cdklab(&["suite", "--only", "6"]), 1);
}
