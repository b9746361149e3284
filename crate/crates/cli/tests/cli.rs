use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_regioncount"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const MIXED_DATA: &str = "x0,x1,label\n-1.0,0.5,0\n-2.0,-0.3,0\n-0.5,1.5,0\n1.0,0.2,1\n2.0,-1.0,1\n0.7,0.9,1\n";
const CONSTANT_MODEL: &str = r#"{"kind":"constant","dims":[2,2],"weights":[],"label":1}"#;
const LINEAR_MODEL: &str = r#"{"kind":"linear","dims":[2,2],"weights":[[[0.0,0.0],[1.0,0.0]]],"biases":[[0.0,0.0]]}"#;

const SMALL_SWEEP: &str = r#"
learning_rates = [0.05, 0.2]
batch_sizes = [16]
weight_decays = [0.0]
seeds = [0, 1]
epochs = 5

[dataset]
kind = "concentric_rings"
n_train = 64
n_test = 64
d = 2
classes = 2
noise = 0.08
seed = 0

[mlp]
hidden = 8

[region]
k = 1
n_simplices = 10
m = 50
"#;

#[test]
fn constant_model_has_one_region() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", CONSTANT_MODEL);
    let data = write(&dir, "d.csv", MIXED_DATA);
    let out = run(&["count", "--model", s(&model), "--data", s(&data), "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["mean"], 1.0);
    assert_eq!(v["std_error"], 0.0);
}

#[test]
fn linear_model_on_mixed_data_stays_between_one_and_two() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", LINEAR_MODEL);
    let data = write(&dir, "d.csv", MIXED_DATA);
    let out = run(&["count", "--model", s(&model), "--data", s(&data), "--k", "1", "--simplices", "50"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "mean,std_error,n,k,m,range_low,range_high,seed");
    let mean: f64 = lines.next().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((1.0..=2.0).contains(&mean), "mean {mean}");
}

#[test]
fn count_json_mirrors_csv_columns() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", LINEAR_MODEL);
    let data = write(&dir, "d.csv", MIXED_DATA);
    let base = ["count", "--model", s(&model), "--data", s(&data), "--k", "2", "--simplices", "20"];
    let csv = stdout(&run(&base));
    let json = stdout(&run(&[&base[..], &["--format", "json"]].concat()));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys.join(","), csv.lines().next().unwrap());
}

#[test]
fn count_is_deterministic_across_runs_and_workers() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", LINEAR_MODEL);
    let data = write(&dir, "d.csv", MIXED_DATA);
    let args = ["count", "--model", s(&model), "--data", s(&data), "--k", "2", "--format", "json", "--seed", "9"];
    let a = run(&[&args[..], &["--workers", "1"]].concat());
    let b = run(&[&args[..], &["--workers", "4"]].concat());
    let c = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn count_writes_optional_file() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", CONSTANT_MODEL);
    let data = write(&dir, "d.csv", MIXED_DATA);
    let out_path = dir.path().join("estimate.csv");
    let out = run(&["count", "--model", s(&model), "--data", s(&data), "--out", s(&out_path)]);
    assert!(out.status.success());
    assert_eq!(fs::read(&out_path).unwrap(), out.stdout);
}

#[test]
fn count_range_and_sources() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", LINEAR_MODEL);
    let data = write(&dir, "d.csv", MIXED_DATA);
    let ok = run(&["count", "--model", s(&model), "--data", s(&data), "--range", "-1..2", "--format", "json"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&ok)).unwrap();
    assert_eq!(v["range_low"], -1.0);
    assert_eq!(v["range_high"], 2.0);
    let rd = run(&["count", "--model", s(&model), "--data", s(&data), "--source", "random-direction"]);
    assert!(rd.status.success());
    let test = run(&["count", "--model", s(&model), "--data", s(&data), "--source", "test", "--test-data", s(&data)]);
    assert!(test.status.success());
    let missing = run(&["count", "--model", s(&model), "--data", s(&data), "--source", "test"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn count_usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", LINEAR_MODEL);
    let bad_model = write(&dir, "bad.json", "{not json");
    let data = write(&dir, "d.csv", MIXED_DATA);
    let data3 = write(&dir, "d3.csv", "a,b,c,label\n1,2,3,0\n3,2,1,1\n0,1,1,0\n");
    for args in [
        vec!["count", "--model", s(&bad_model), "--data", s(&data)],
        vec!["count", "--model", s(&model), "--data", s(&data3)],
        vec!["count", "--model", s(&model), "--data", s(&data), "--range", "2..1"],
        vec!["count", "--model", s(&model), "--data", s(&data), "--k", "9"],
        vec!["count", "--model", s(&model)],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn zero_step_training_emits_only_the_init_checkpoint() {
    let out = run(&["train-theory", "--eta", "0.05", "--steps", "0", "--n", "16", "--p", "8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("0,"));
}

#[test]
fn theory_rows_all_satisfy_the_bound() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("net.json");
    let out = run(&[
        "train-theory", "--eta", "0.08", "--steps", "100", "--checkpoint-every", "20", "--n", "24", "--p", "16",
        "--save-model", s(&model),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    assert!(fs::read_to_string(&model).unwrap().contains("two_layer_relu"));
}

#[test]
fn zero_norm_sample_is_a_precondition_failure() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "z.csv", "x0,x1,label\n0.0,0.0,0\n1.0,1.0,1\n");
    let out = run(&["train-theory", "--eta", "0.1", "--steps", "5", "--data", s(&data)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn theory_flag_conflicts_exit_two() {
    let out = run(&["train-theory", "--eta", "0.1", "--d", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["train-theory", "--eta", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_suites_pass_on_small_runs() {
    for (suite, cases) in [("oracle-regions", "50"), ("lemma-sharpness", "10"), ("gradients", "5"), ("theorem", "2")] {
        let out = run(&["verify", "--suite", suite, "--cases", cases, "--seed", "3"]);
        assert!(out.status.success(), "{suite}: {}", stdout(&out));
        assert!(stdout(&out).contains("PASS"));
    }
    let out = run(&["verify", "--suite", "lemma-region", "--cases", "4", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["cases"], 4);
}

#[test]
fn sweep_correlate_plot_pipeline() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "sweep.toml", SMALL_SWEEP);
    let records = dir.path().join("records.csv");
    let out = run(&["sweep", "--config", s(&config), "--out", s(&records), "--workers", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = fs::read(&records).unwrap();
    let again = run(&["sweep", "--config", s(&config), "--workers", "1"]);
    assert_eq!(again.stdout, first, "sweep output must not depend on the worker count");
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 5);

    let corr = run(&["correlate", "--records", s(&records), "--x", "lr", "--y", "frob_dist", "--format", "json"]);
    assert!(corr.status.success(), "{}", String::from_utf8_lossy(&corr.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&corr)).unwrap();
    assert_eq!(v["n"], 4);

    let svg_path = dir.path().join("plot.svg");
    let plot = run(&["plot", "--records", s(&records), "--x", "lr", "--y", "frob_dist", "--out", s(&svg_path)]);
    assert!(plot.status.success());
    let svg = fs::read_to_string(&svg_path).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 4);
}

#[test]
fn two_record_correlation_is_perfect() {
    let dir = TempDir::new().unwrap();
    let header = "lr,batch,wd,seed,train_acc,test_acc,gap,region_mean,region_stderr,frob_dist,margin,wall_s,diverged";
    let records = write(
        &dir,
        "r.csv",
        &format!("{header}\n0.1,8,0,0,1,0.9,0.1,2.0,0.1,1,1,0,false\n0.2,8,0,1,1,0.8,0.2,3.5,0.1,2,1,0,false\n"),
    );
    let out = run(&["correlate", "--records", s(&records)]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let r: f64 = row[3].parse().unwrap();
    assert!((r.abs() - 1.0).abs() < 1e-12);
}

#[test]
fn one_record_plot_is_valid_svg() {
    let dir = TempDir::new().unwrap();
    let header = "lr,batch,wd,seed,train_acc,test_acc,gap,region_mean,region_stderr,frob_dist,margin,wall_s,diverged";
    let records = write(&dir, "r.csv", &format!("{header}\n0.1,8,0,0,1,0.9,0.1,2.0,0.1,1,1,0,false\n"));
    let out = run(&["plot", "--records", s(&records)]);
    assert!(out.status.success());
    let svg = stdout(&out);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 1);
}

#[test]
fn degenerate_or_malformed_records() {
    let dir = TempDir::new().unwrap();
    let missing = write(&dir, "m.csv", "lr,batch\n0.1,8\n");
    let out = run(&["correlate", "--records", s(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["plot", "--records", s(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    let header = "lr,batch,wd,seed,train_acc,test_acc,gap,region_mean,region_stderr,frob_dist,margin,wall_s,diverged";
    let flat = write(
        &dir,
        "f.csv",
        &format!("{header}\n0.1,8,0,0,1,0.9,0.1,2.0,0.1,1,1,0,false\n0.2,8,0,1,1,0.9,0.1,3.0,0.1,2,1,0,false\n"),
    );
    let out = run(&["correlate", "--records", s(&flat)]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["verify", "--suite", "gradients", "--config", s(&flat)]);
    assert_eq!(out.status.code(), Some(2));
}
