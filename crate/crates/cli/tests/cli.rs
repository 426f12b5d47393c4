use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn semkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semkit")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = semkit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn lines(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn generated(dir: &Path, n: usize) -> String {
    let path = dir.join("gen.jsonl");
    ok(&["generate", "--n", &n.to_string(), "--seed", "3", "--out", path.to_str().unwrap()]);
    path.to_str().unwrap().to_string()
}

#[test]
fn generate_writes_examples_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let gen = generated(dir.path(), 30);
    let rows = lines(Path::new(&gen));
    assert_eq!(rows.len(), 30);
    assert_eq!(rows[0]["id"], "gen-000000");
    let header: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("gen.jsonl.header.json")).unwrap()).unwrap();
    assert_eq!(header["command"], "generate");
    assert_eq!(header["seed"], 3);
    assert_eq!(header["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn generate_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (pa, pb) = (generated(a.path(), 25), generated(b.path(), 25));
    assert_eq!(fs::read(pa).unwrap(), fs::read(pb).unwrap());
}

#[test]
fn select_lfs_lc_d_emits_k_rows() {
    let dir = tempfile::tempdir().unwrap();
    let gen = generated(dir.path(), 40);
    let out = dir.path().join("sel.jsonl");
    ok(&[
        "select", "--method", "lfs-lc-d", "--alpha", "0.75", "--beta", "0.75", "--k", "6", "--pool", &gen, "--out",
        out.to_str().unwrap(),
    ]);
    let rows = lines(&out);
    assert_eq!(rows.len(), 6);
    let ids: std::collections::BTreeSet<_> = rows.iter().map(|r| r["id"].as_str().unwrap().to_string()).collect();
    assert_eq!(ids.len(), 6);
    assert!(rows.iter().enumerate().all(|(i, r)| r["rank"] == i));
}

#[test]
fn select_grid_writes_sixteen_cells() {
    let dir = tempfile::tempdir().unwrap();
    let gen = generated(dir.path(), 20);
    let out = dir.path().join("grid");
    ok(&["select", "--method", "lfs-lc-d", "--k", "3", "--grid", "--pool", &gen, "--out", out.to_str().unwrap()]);
    assert!(out.join("header.json").exists());
    let cells = fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).count();
    assert_eq!(cells, 16);
}

#[test]
fn sample_memory_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let gen = generated(dir.path(), 30);
    let mem = dir.path().join("mem.jsonl");
    let out = ok(&["sample-memory", "--m", "4", "--input", &gen, "--out", mem.to_str().unwrap()]);
    assert_eq!(lines(&mem).len(), 4);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["entropy"].as_f64().unwrap() >= 0.0);

    let out = ok(&["evaluate", "--metric", "ttr", "--corpus", &gen]);
    let ttr = serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap()["ttr"].as_f64().unwrap();
    assert!(ttr > 0.0 && ttr <= 1.0);
}

#[test]
fn evaluate_component_f1() {
    let dir = tempfile::tempdir().unwrap();
    let gold = dir.path().join("gold.jsonl");
    let pred = dir.path().join("pred.jsonl");
    fs::write(&gold, "{\"id\":\"a\",\"target\":\"SELECT name FROM ships WHERE x = 1\"}\n").unwrap();
    fs::write(&pred, "{\"id\":\"a\",\"pred\":\"select name from ships where x = 1\"}\n").unwrap();
    let out = ok(&["evaluate", "--metric", "component-f1", "--gold", gold.to_str().unwrap(), "--pred", pred.to_str().unwrap()]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["macro_f1"].as_f64().unwrap(), 100.0);
}

#[test]
fn simulate_hat_runs() {
    let dir = tempfile::tempdir().unwrap();
    let gen = generated(dir.path(), 300);
    let rows = lines(Path::new(&gen));
    let mut mt = String::new();
    let mut ht = String::new();
    for r in &rows {
        let id = r["id"].as_str().unwrap();
        mt.push_str(&format!("{{\"id\":\"{id}\",\"text\":\"mt {id}\"}}\n"));
        ht.push_str(&format!("{{\"id\":\"{id}\",\"text\":\"ht {id}\"}}\n"));
    }
    fs::write(dir.path().join("mt.jsonl"), mt).unwrap();
    fs::write(dir.path().join("ht.jsonl"), ht).unwrap();
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        "seed = 1\noutput_dir = \"out\"\n\n[data]\npool = \"gen.jsonl\"\nhuman_translations = \"ht.jsonl\"\n\
         machine_translations = \"mt.jsonl\"\n\n[acquisition]\nmethod = \"random\"\n",
    )
    .unwrap();
    ok(&["simulate", "--config", config.to_str().unwrap(), "--mode", "hat"]);
    let out = dir.path().join("out");
    assert!(out.join("header.json").exists());
    // default schedule: 1, 2, 4, 8, 16 percent of 300, cumulative
    let last = lines(&out.join("round_05/manifest.jsonl"));
    let ht_rows = last.iter().filter(|r| r["origin"] == "human").count();
    let mt_rows = last.iter().filter(|r| r["origin"] == "machine").count();
    assert_eq!(mt_rows, 300);
    assert_eq!(ht_rows, 48);
}

#[test]
fn exit_codes() {
    assert_eq!(semkit(&["select", "--bogus"]).status.code(), Some(2));
    assert_eq!(semkit(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.jsonl");
    let out = dir.path().join("o.jsonl");
    let code = semkit(&["align-priors", "--input", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.code();
    assert_eq!(code, Some(1));
    let gen = generated(dir.path(), 5);
    let code = semkit(&["align-priors", "--input", &gen, "--gamma", "2", "--out", out.to_str().unwrap()]).status.code();
    assert_eq!(code, Some(2));
}
