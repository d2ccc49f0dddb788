use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_frustfree"));
    c.env_remove("FRUSTFREE_VERIFY_CAP");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn golden(dir: &TempDir, name: &str) -> PathBuf {
    let p = path(dir, &format!("{name}.json"));
    let o = run(&["generate", "golden", "--name", name, "-o", s(&p)]);
    assert!(o.status.success());
    p
}

fn grown(dir: &TempDir, lattice: &str, count: &str, seed: &str) -> PathBuf {
    let p = path(dir, "grown.json");
    let o = run(&["generate", "grown", "--lattice", lattice, "--count", count, "--seed", seed, "-o", s(&p)]);
    assert!(o.status.success());
    p
}

#[test]
fn check_reports_the_xx_cycle_as_unfrustrated() {
    let dir = TempDir::new().unwrap();
    let model = golden(&dir, "xx4cycle");
    let o = run(&["--verify", "check", s(&model)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("UNFRUSTRATED, dim ker = 2"));
}

#[test]
fn check_reports_a_rank3_cascade_with_exit_zero() {
    let dir = TempDir::new().unwrap();
    let model = golden(&dir, "double-rank3");
    let o = run(&["--verify", "check", s(&model)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("FRUSTRATED (rank-3 cascade)"));
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.json");
    fs::write(&bad, "{\"vertices\": [").unwrap();
    for cmd in ["check", "reduce", "ground", "oracle"] {
        assert_eq!(run(&[cmd, s(&bad)]).status.code(), Some(2), "{cmd}");
    }
    assert_eq!(run(&["check", s(&path(&dir, "missing.json"))]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn non_hermitian_edge_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let model = path(&dir, "m.json");
    let mut m = vec!["[0,0]"; 16];
    m[1] = "[1,0]";
    let text = format!(
        "{{\"vertices\":[\"a\",\"b\"],\"edges\":[{{\"a\":\"a\",\"b\":\"b\",\"matrix\":[{}]}}]}}",
        m.join(",")
    );
    fs::write(&model, text).unwrap();
    let o = run(&["check", s(&model)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn commands_needing_a_ground_space_exit_one_on_frustration() {
    let dir = TempDir::new().unwrap();
    let model = golden(&dir, "double-rank3");
    assert_eq!(run(&["ground", s(&model)]).status.code(), Some(1));
    let obs = path(&dir, "z.json");
    fs::write(&obs, r#"{"support":["1"],"matrix":[[1,0],[0,0],[0,0],[-1,0]]}"#).unwrap();
    assert_eq!(run(&["expect", s(&model), s(&obs)]).status.code(), Some(1));
}

#[test]
fn reduce_writes_a_parsable_trace() {
    let dir = TempDir::new().unwrap();
    let model = golden(&dir, "xx4cycle");
    let out = path(&dir, "trace.json");
    let o = run(&["--verify", "reduce", s(&model), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["verdict"], "unfrustrated");
    assert_eq!(v["kernel_dim"], 2);
    assert!(v["trace"]["steps"].as_array().is_some_and(|s| !s.is_empty()));
    assert!(v["complete"]["vertices"].is_array());
}

#[test]
fn ground_exports_one_vector_per_kernel_dimension() {
    let dir = TempDir::new().unwrap();
    let model = path(&dir, "p.json");
    run(&["generate", "planted", "-n", "4", "--seed", "3", "-o", s(&model)]);
    let o = run(&["--verify", "ground", s(&model)]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kernel_dim"], 5);
    let comps = v["components"].as_array().unwrap();
    let total: usize = comps
        .iter()
        .map(|c| c["factors"].as_array().or(c["vectors"].as_array()).unwrap().len())
        .product();
    assert_eq!(total, 5);
}

#[test]
fn expectation_is_verified_against_diagonalization() {
    let dir = TempDir::new().unwrap();
    let model = grown(&dir, "chain:6", "1", "1");
    let obs = path(&dir, "zz.json");
    let zz = "[[1,0],[0,0],[0,0],[0,0],[0,0],[-1,0],[0,0],[0,0],[0,0],[0,0],[-1,0],[0,0],[0,0],[0,0],[0,0],[1,0]]";
    fs::write(&obs, format!(r#"{{"support":["2","3"],"matrix":{zz}}}"#)).unwrap();
    let o = run(&["--verify", "expect", s(&model), s(&obs)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["expectation"].as_f64().unwrap().abs() <= 1.0 + 1e-12);
}

#[test]
fn entangle_accepts_files_and_rectangles() {
    let dir = TempDir::new().unwrap();
    let model = grown(&dir, "grid:3x3", "2", "5");
    let region = path(&dir, "a.json");
    fs::write(&region, r#"["1","2","4","5"]"#).unwrap();
    let from_file = run(&["--verify", "entangle", s(&model), "--region", s(&region)]);
    assert_eq!(from_file.status.code(), Some(0));
    let from_rect = run(&["entangle", s(&model), "--rect", "0,0:1,1", "--shape", "3,3"]);
    assert_eq!(from_rect.status.code(), Some(0));
    let a: Value = serde_json::from_str(&stdout(&from_file)).unwrap();
    let b: Value = serde_json::from_str(&stdout(&from_rect)).unwrap();
    assert_eq!(a, b);
    assert!(a["heavy_component_bound"].as_f64() >= a["schmidt_measure_bound"].as_f64());
    let table = run(&["entangle", s(&model), "--region", s(&region), "--format", "table"]);
    assert!(stdout(&table).contains("schmidt measure bound"));
}

#[test]
fn entangle_rejects_a_region_covering_everything() {
    let dir = TempDir::new().unwrap();
    let model = golden(&dir, "xx4cycle");
    let o = run(&["entangle", s(&model), "--rect", "0:3", "--shape", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn percolate_writes_csv_rows_and_a_summary() {
    let dir = TempDir::new().unwrap();
    let csv_path = path(&dir, "rows.csv");
    let summary = path(&dir, "summary.json");
    let o = run(&[
        "--verify", "percolate", "-d", "2", "-L", "4,8", "-p", "0.6", "--trials", "30", "--seed", "42", "--csv",
        s(&csv_path), "--summary", s(&summary),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("L,trial,k,A0,bound"));
    assert_eq!(lines.count(), 60);
    let v: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(v["sizes"].as_array().unwrap().len(), 2);
    assert!(v["fit"].is_array());
}

#[test]
fn percolate_is_deterministic_and_rejects_few_trials() {
    let args = ["percolate", "-d", "2", "-L", "6", "-p", "0.5", "--trials", "30", "--seed", "7"];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
    let o = run(&["percolate", "-d", "2", "-L", "6", "-p", "0.5", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn variational_energy_is_an_upper_bound() {
    let dir = TempDir::new().unwrap();
    let h0 = path(&dir, "h0.json");
    run(&["generate", "planted", "-n", "4", "--seed", "8", "-o", s(&h0)]);
    let h1 = path(&dir, "h1.json");
    fs::write(
        &h1,
        r#"{"vertices":["1","2","3","4"],"singles":[{"v":"2","matrix":[[0,0],[1,0],[1,0],[0,0]]}]}"#,
    )
    .unwrap();
    for lambda in ["-0.5", "0", "0.1"] {
        let o = run(&["--verify", "variational", "--h0", s(&h0), "--h1", s(&h1), "--lambda", lambda]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(v["energy"].is_f64());
        assert_eq!(v["coefficients"].as_array().unwrap().len(), 5);
    }
}

#[test]
fn generated_models_round_trip_through_check() {
    let dir = TempDir::new().unwrap();
    for (kind, extra) in [("random", vec!["--lattice", "cycle:5"]), ("cascade", vec!["--lattice", "chain:5", "--count", "1"])] {
        let p = path(&dir, &format!("{kind}.json"));
        let mut args = vec!["--verify", "generate", kind, "--seed", "11", "-o", s(&p)];
        args.extend(extra);
        assert_eq!(run(&args).status.code(), Some(0), "{kind}");
        assert_eq!(run(&["--verify", "check", s(&p)]).status.code(), Some(0), "{kind}");
    }
}

#[test]
fn verification_cap_comes_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let model = golden(&dir, "xx4cycle");
    let o = bin()
        .env("FRUSTFREE_VERIFY_CAP", "2")
        .args(["--verify", "check", s(&model)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipped"));
    let plain = run(&["check", s(&model)]);
    assert_eq!(stdout(&o), stdout(&plain));
}

#[test]
fn oracle_reports_the_exact_spectrum_edge() {
    let dir = TempDir::new().unwrap();
    let model = golden(&dir, "xx4cycle");
    let o = run(&["oracle", s(&model)]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kernel_dim"], 2);
    assert_eq!(v["frustration_free"], true);
}
