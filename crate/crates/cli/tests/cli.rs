use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn dsine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsine")).args(args).output().expect("binary runs")
}

fn recipe(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../recipes").join(name)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn passing_run_exits_zero_with_report() {
    let out =
        dsine(&["condition-22", "--preset", "oscillating_quadratic", "--expect", "decaying", "--tail-bound", "9"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = report(&out);
    assert_eq!(rep["command"], "condition-22");
    assert_eq!(rep["passed"], true);
    assert_eq!(rep["assertions"].as_array().unwrap().len(), 2);
    assert_eq!(rep["config"]["membership"]["condition_22"]["horizon"], 1024);
    assert_eq!(rep["result"]["tail"]["verdict"], "decaying");
}

#[test]
fn failed_assertion_exits_one() {
    let out = dsine(&["condition-22", "--preset", "product_power(1,1)", "--expect", "decaying"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["passed"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAILED"));
}

#[test]
fn bad_input_exits_two() {
    for args in [
        &["check-class", "--preset", "nonsense"][..],
        &["check-class"][..],
        &["partial-sum", "--preset", "zero", "--rect", "3:1x1:1"][..],
        &["condition-22", "--preset", "zero", "--expect", "sideways"][..],
        &["frobnicate"][..],
        &["remark2", "--schedule", "10,5"][..],
    ] {
        let out = dsine(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.toml");
    std::fs::write(&path, "[cli]\ncommand = \"remark2\"\n[convergence.remark2]\nschedul = [10]\n").unwrap();
    let out = dsine(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schedul"));
}

#[test]
fn flags_override_the_config_file() {
    let path = recipe("separation_r2.toml");
    let out = dsine(&["check-class", "--config", path.to_str().unwrap(), "--grid-max", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let cfg = &report(&out)["config"];
    assert_eq!(cfg["membership"]["check_class"]["grid_max"], 64);
    assert_eq!(cfg["membership"]["check_class"]["max_row_c"], 4.0);
    assert_eq!(cfg["sequences"]["preset"], "oscillating_quadratic");
}

#[test]
fn resolved_config_replays_to_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let first = dsine(&["lemma", "--preset", "oscillating_quadratic", "--schedule", "4,8,16"]);
    let rep = report(&first);
    let replay = dir.path().join("replay.toml");
    let cfg: toml::Value = serde_json::from_value(rep["config"].clone()).unwrap();
    std::fs::write(&replay, toml::to_string(&cfg).unwrap()).unwrap();
    let second = dsine(&["run", replay.to_str().unwrap()]);
    assert_eq!(second.status.code(), Some(0), "{}", String::from_utf8_lossy(&second.stderr));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn out_dir_gets_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = dsine(&[
        "--out-dir",
        d,
        "uniform-tail",
        "--preset",
        "oscillating_quadratic",
        "--grid",
        "5",
        "--lattice-max",
        "256",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json = std::fs::read(dir.path().join("uniform-tail.json")).unwrap();
    assert_eq!(json, out.stdout);
    let tail = std::fs::read_to_string(dir.path().join("uniform-tail_tail.csv")).unwrap();
    assert!(tail.starts_with("scale,value,bounded_flag\n"));
    assert_eq!(tail.lines().count(), 6);
    assert!(dir.path().join("uniform-tail_trace.csv").exists());
}

#[test]
fn thread_count_does_not_change_output() {
    let args = |t: &'static str| {
        ["--threads", t, "check-class", "--preset", "mod3_log_product", "--r", "3", "--grid-max", "128"]
    };
    let a = dsine(&args("1"));
    let b = dsine(&args("4"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn single_index_classes() {
    let out = dsine(&["check-class", "--single", "1/n", "--class", "sbvs", "--grid-max", "256", "--max-c", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = report(&out);
    assert_eq!(rep["result"]["membership"]["class"]["class"], "sbvs");
    assert!(rep["config"].get("sequences").is_none());
}

#[test]
fn eta_failure_is_an_assertion_not_an_error() {
    let out = dsine(&["eta", "--preset", "mod3_log_product", "--constant", "1", "--epsilon", "0.01", "--cap", "64"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = report(&out);
    assert_eq!(rep["assertions"][0]["passed"], false);
}

#[test]
fn claim_recipes_pass() {
    for name in ["condition22_harmonic.toml", "mod3_divergence.toml", "partial_sum.toml", "separation_r1.toml"] {
        let out = dsine(&["run", recipe(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
