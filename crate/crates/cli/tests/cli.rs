use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ocrs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ocrs")).args(args).output().expect("binary runs")
}

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name).display().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn solve_exante_rank1_pair() {
    let o = ocrs(&["solve-exante", "--instance", &corpus("rank1-pair.json")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("objective 1"));
    let v = stdout_json(&o);
    assert!((v["objective"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let w: f64 = v["weights"].as_array().unwrap().iter().map(|w| w.as_f64().unwrap()).sum();
    assert!((w - 1.0).abs() < 1e-9);
}

#[test]
fn solve_exante_empty_and_bad_inputs() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.json", r#"{"v":1,"matroid":{"kind":"uniform","n":0,"rank":0},"model":"bernoulli","p":[],"y":[]}"#);
    let o = ocrs(&["solve-exante", "--instance", empty.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["objective"].as_f64(), Some(0.0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("objective 0"));

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&ocrs(&["solve-exante", "--instance", missing.to_str().unwrap()])), 2);
    let bad = write(&dir, "bad.json", r#"{"v":1,"matroid":"#);
    assert_eq!(code(&ocrs(&["solve-exante", "--instance", bad.to_str().unwrap()])), 2);

    let outside = write(
        &dir,
        "outside.json",
        r#"{"v":1,"matroid":{"kind":"uniform","n":2,"rank":1},"model":"bernoulli","p":[1,1],"y":[1,1],"x":[0.8,0.8]}"#,
    );
    assert_eq!(code(&ocrs(&["solve-exante", "--instance", outside.to_str().unwrap()])), 3);
}

#[test]
fn rank1_ocrs_on_half_half() {
    let o = ocrs(&["run", "--instance", &corpus("rank1-pair.json"), "--scheme", "rank1-ocrs", "--x", "0.5,0.5", "--trials", "20000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["selectability"]["mode"], "exact");
    assert!((v["selectability"]["c"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    for e in v["selectability"]["elements"].as_array().unwrap() {
        assert!((e["p_select"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    }
}

#[test]
fn adversarial_on_hat() {
    let o = ocrs(&["run", "--instance", &corpus("hat-2.json"), "--scheme", "adversarial", "--trials", "20000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = &stdout_json(&o)["ratio"];
    let (e, se, obj) = (r["e_alg"].as_f64().unwrap(), r["se"].as_f64().unwrap(), r["exante_objective"].as_f64().unwrap());
    assert!(e >= 0.5 * obj - 3.0 * se);
}

#[test]
fn scheme_mismatches_exit_4() {
    let pair = corpus("rank1-pair.json");
    let o = ocrs(&["run", "--instance", &pair, "--scheme", "rank1-ocrs", "--x", "0.9,0.9"]);
    assert_eq!(code(&o), 4);
    let o = ocrs(&["run", "--instance", &corpus("hat-2.json"), "--scheme", "rank1-rcrs"]);
    assert_eq!(code(&o), 4);
    let o = ocrs(&["run", "--instance", &pair, "--scheme", "random-order", "--order", "1,0"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn lp_ocrs_file_round_trip() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("lp.json");
    let hat = corpus("hat-2.json");
    let o = ocrs(&["build-lp-ocrs", "--instance", &hat, "--order", "4,3,2,1,0", "--mode", "fixed", "--eps", "1e-6", "--out", file.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let built: Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    assert!(built["certified_c"].as_f64().unwrap() >= 0.5 - 1e-6);

    let o = ocrs(&["run", "--instance", &hat, "--scheme", "lp-ocrs", "--scheme-file", file.to_str().unwrap(), "--trials", "5000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let c = stdout_json(&o)["selectability"]["c"].as_f64().unwrap();
    assert!((c - built["certified_c"].as_f64().unwrap()).abs() < 1e-9);

    let o = ocrs(&["run", "--instance", &hat, "--scheme", "lp-ocrs", "--scheme-file", file.to_str().unwrap(), "--order", "0,1,2,3,4"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn same_seed_same_report_any_worker_count() {
    let args = |w: &'static str| {
        ["run", "--instance", "", "--scheme", "rank1-rcrs", "--trials", "30000", "--seed", "7", "--workers", w]
    };
    let uniform = corpus("uniform-5.json");
    let run = |w| {
        let mut a = args(w);
        a[2] = &uniform;
        ocrs(&a)
    };
    let (a, b, c) = (run("1"), run("3"), run("3"));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(b.stdout, c.stdout);
    assert_eq!(stdout_json(&a)["ratio"]["seed"].as_u64(), Some(7));
}

#[test]
fn traces_and_csv() {
    let dir = TempDir::new().unwrap();
    let traces = dir.path().join("t.jsonl");
    let o = ocrs(&[
        "run",
        "--instance",
        &corpus("partition-0.json"),
        "--scheme",
        "random-order",
        "--trials",
        "300",
        "--format",
        "csv",
        "--dump-traces",
        traces.to_str().unwrap(),
    ]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("element,x_i,p_select,mode,se,trials\n"), "{text}");
    let lines: Vec<Value> = fs::read_to_string(&traces).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 300);
    for t in &lines {
        let total = t["total"].as_f64().unwrap();
        assert!((total - t["revenue"].as_f64().unwrap() - t["utility"].as_f64().unwrap()).abs() < 1e-9);
        assert!(t["times"].is_array());
    }
}

#[test]
fn verify_filter_selects_rank1_criteria() {
    let o = ocrs(&["verify", "--filter", "rank1", "--trials", "20000"]);
    assert!(matches!(code(&o), 0 | 5));
    let ids: Vec<u64> = stdout_json(&o).as_array().unwrap().iter().map(|r| r["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![1, 2, 6]);
    assert_eq!(code(&ocrs(&["verify", "--filter", "no-such-criterion"])), 2);
}

#[test]
fn bundled_corpus_matches_export() {
    let dir = TempDir::new().unwrap();
    let o = ocrs(&["export-corpus", "--dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let bundled = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 10);
    for name in names {
        let fresh = fs::read_to_string(dir.path().join(&name)).unwrap();
        let shipped = fs::read_to_string(bundled.join(&name)).unwrap_or_default();
        assert_eq!(fresh, shipped, "{name:?}");
        let o = ocrs(&["solve-exante", "--instance", dir.path().join(&name).to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{name:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
