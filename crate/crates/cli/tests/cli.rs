use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hirank(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hirank"));
    cmd.args(args).env_remove("HIRANK_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.env("HIRANK_CACHE_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: stdout {:?}, stderr {:?}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

/// The function equal to `x` on the diagonal of `xy(x − y) = 0` and 0 on the axes.
fn write_example(path: &Path, p: u32) {
    let mut text = String::from("x1,x2,value\n");
    for x in 0..p {
        for y in 0..p {
            if x * y * ((x + p - y) % p) % p == 0 {
                let v = if x == y { x } else { 0 };
                text += &format!("{x},{y},{v}\n");
            }
        }
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn rank_of_p2() {
    let out = hirank(&["rank", "x1*x2 + x3*x4", "--field", "7"], None);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schmidt"], 2);
    assert_eq!(v["singular_bound"], 1.0);
}

#[test]
fn example_is_weak_but_not_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.csv");
    write_example(&f, 7);
    let variety = ["--poly", "x1*x2*(x1 - x2)", "--field", "7", "--a", "1"];
    let weak = hirank(&[&["weaktest", f.to_str().unwrap(), "--mode", "lines"][..], &variety].concat(), None);
    assert_eq!(weak.status.code(), Some(0));
    assert_eq!(json(&weak)["weakly_polynomial"], true);
    let ext = hirank(&[&["extend", f.to_str().unwrap(), "--engine", "solver"][..], &variety].concat(), None);
    assert_eq!(ext.status.code(), Some(0));
    let v = json(&ext);
    assert_eq!(v["status"], "no_extension");
    assert!(v["certificate"].is_array());
}

#[test]
fn extend_engines_on_x2() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.csv");
    let r = hirank(&["restrict", "x1*x3 + 2*x2 + 1", "--xn", "2", "--field", "7", "--to", f.to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(0));
    for engine in ["solver", "constructive", "inductive"] {
        let out = hirank(&["extend", f.to_str().unwrap(), "--xn", "2", "--field", "7", "--a", "2", "--engine", engine], None);
        assert_eq!(out.status.code(), Some(0), "{engine}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["status"], "extended", "{engine}");
    }
}

#[test]
fn suite_passes_and_is_deterministic() {
    let a = hirank(&["suite", "--field", "7", "--d", "2", "--a", "2"], None);
    let b = hirank(&["suite", "--field", "7", "--d", "2", "--a", "2"], None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(json(&a)["pass"], true);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn random_fiber_search_is_reproducible() {
    let args = ["fiber", "x1*x2 + x3*x4", "x1^2 + 1", "--field", "5", "--strategy", "random", "--draws", "2000", "--seed", "9"];
    let a = hirank(&args, None);
    let b = hirank(&args, None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn fiber_scan_separates_rank() {
    let hi = json(&hirank(&["fiber-scan", "x1*x2 + x3*x4 + x5*x6", "--field", "5"], None));
    assert_eq!(hi["onto"], true);
    let lo = json(&hirank(&["fiber-scan", "x1*x2", "--field", "5"], None));
    assert_eq!(lo["onto"], false);
    assert_eq!(lo["missing_count"], 40);
}

#[test]
fn exit_codes() {
    let bad_field = hirank(&["rank", "x1", "--field", "6"], None);
    assert_eq!(bad_field.status.code(), Some(2));
    let not_admissible = hirank(&["suite", "--field", "5", "--a", "2"], None);
    assert_eq!(not_admissible.status.code(), Some(2));
    let unparsable = hirank(&["rank", "x1 +* x2", "--field", "7"], None);
    assert_eq!(unparsable.status.code(), Some(2));
    let budget = hirank(&["xn", "--n", "3", "--field", "7", "--max-enum", "1000"], None);
    assert_eq!(budget.status.code(), Some(3));
}

#[test]
fn cache_is_coherent() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["deficiency", "--xn", "2", "--field", "7", "--ell", "x1", "--b", "1"];
    let plain = json(&hirank(&args, None));
    let first = hirank(&args, Some(dir.path()));
    let second = hirank(&args, Some(dir.path()));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(json(&first), plain);
    let xn = json(&hirank(&["xn", "--n", "2", "--field", "7"], Some(dir.path())));
    assert_eq!(xn["from_cache"], true);
    assert_eq!(xn["points"], 385);
}

#[test]
fn records_are_appended() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    for _ in 0..2 {
        let out = hirank(&["rank", "x1*x2", "--field", "5", "--record", log.to_str().unwrap()], None);
        assert_eq!(out.status.code(), Some(0));
    }
    let text = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["command"], "rank");
    assert_eq!(lines[0]["output_sha256"], lines[1]["output_sha256"]);
    assert_eq!(lines[0]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("session.conf");
    std::fs::write(&cfg, "# desk session\nfield = 5\nd = 2\na = 2\n").unwrap();
    let from_file = hirank(&["suite", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(from_file.status.code(), Some(2));
    let overridden = hirank(&["suite", "--config", cfg.to_str().unwrap(), "--field", "7"], None);
    assert_eq!(overridden.status.code(), Some(0));
}
