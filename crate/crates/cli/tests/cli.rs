use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ecomplexity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecomplexity")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn example(dir: &Path) -> String {
    let path = dir.join("x.csv");
    fs::write(&path, "location,activity,value\nA,x,1\nA,y,1\nB,y,1\n").unwrap();
    path.to_str().unwrap().to_string()
}

/// Numeric column `index` of each data row, with its label.
fn column(text: &str, index: usize) -> Vec<(String, f64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[index].parse().unwrap())
        })
        .collect()
}

#[test]
fn eci_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let input = example(dir.path());
    let text = stdout(&ecomplexity(&["eci", "--input", &input, "--rca-threshold", "0.75"]));
    assert!(text.starts_with("label,raw,standardized,rank\n"));
    let eci = column(&text, 2);
    assert_eq!(eci[0].0, "A");
    assert!((eci[0].1 - 1.0).abs() < 1e-10 && (eci[1].1 + 1.0).abs() < 1e-10);
}

#[test]
fn run_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let input = example(dir.path());
    let out = dir.path().join("out");
    let result = ecomplexity(&["run", "--input", &input, "--rca-threshold", "0.75", "--out-dir", out.to_str().unwrap()]);
    assert!(result.status.success());
    assert!(String::from_utf8_lossy(&result.stderr).starts_with("wrote "));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["rca_threshold"], 0.75);
    assert!(out.join("eci.csv").exists() && out.join("density.csv").exists());
}

#[test]
fn empty_input_fails_with_stage() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.csv");
    fs::write(&input, "").unwrap();
    let out = dir.path().join("out");
    let result = ecomplexity(&["run", "--input", input.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert!(!result.status.success());
    assert!(String::from_utf8_lossy(&result.stderr).starts_with("error [ingest]"));
    assert!(!out.exists());
    let missing = ecomplexity(&["eci"]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error [config]"));
}

#[test]
fn world_is_seeded() {
    let args = ["world", "--mode", "random", "--locations", "6", "--activities", "9", "--seed", "4"];
    let first = stdout(&ecomplexity(&args));
    assert_eq!(first, stdout(&ecomplexity(&args)));
    let incidence = stdout(&ecomplexity(&["world", "--format", "incidence", "--locations", "5", "--activities", "5"]));
    assert_eq!(incidence.lines().count(), 6);
}

#[test]
fn compare_score_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(&a, "label,standardized\nu,1\nv,2\nw,3\nz,4\n").unwrap();
    fs::write(&b, "label,value\nw,30\nv,20\nu,10\n").unwrap();
    let text = stdout(&ecomplexity(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let field = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(field("n"), "3");
    assert!((field("pearson").parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = example(dir.path());
    let config = dir.path().join("run.conf");
    // 2.0 leaves B without any activity, which would make ECI degenerate
    fs::write(&config, format!("# test\ninput = {input}\nrca-threshold = 2.0\n")).unwrap();
    let text = stdout(&ecomplexity(&["eci", "--config", config.to_str().unwrap(), "--rca-threshold", "0.75"]));
    assert_eq!(column(&text, 2).len(), 2);
    let failed = ecomplexity(&["eci", "--config", config.to_str().unwrap()]);
    assert!(!failed.status.success());
}
