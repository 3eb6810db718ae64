use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn epsnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epsnet")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn gen(dir: &Path, n: usize, seed: u64) -> String {
    let path = dir.join(format!("inst_{n}_{seed}.json"));
    let p = path.to_str().unwrap().to_string();
    let out = epsnet(&["gen", "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", &p]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    p
}

#[test]
fn gen_is_reproducible() {
    let a = epsnet(&["gen", "--n", "12", "--dim", "2", "--seed", "4"]);
    let b = epsnet(&["gen", "--n", "12", "--dim", "2", "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["dim"], 2);
    assert_eq!(v["points"].as_array().unwrap().len(), 12);
    assert_eq!(v["generator"]["seed"], 4);
}

#[test]
fn seed_is_required_for_randomized_commands() {
    assert_eq!(epsnet(&["gen", "--n", "12"]).status.code(), Some(2));
    assert_eq!(epsnet(&["build", "--input", "x.json", "--eps", "1/4"]).status.code(), Some(2));
}

#[test]
fn build_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), 30, 1);
    let net = dir.path().join("net.json");
    let net = net.to_str().unwrap();
    let out = epsnet(&["build", "-i", &inst, "--eps", "1/4", "--seed", "1", "--out", net]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["valid"], true);
    let file: Value = serde_json::from_str(&std::fs::read_to_string(net).unwrap()).unwrap();
    assert_eq!(file["epsilon"], "1/4");
    assert!(file["families"][0]["members"].is_array());

    let ok = epsnet(&["verify", "-i", &inst, "--net", net]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["valid"], true);

    // an empty net misses the full range
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, r#"{"epsilon": "1/4", "beta": "1/22", "net": [], "valid": false}"#).unwrap();
    let bad = epsnet(&["verify", "-i", &inst, "--net", empty.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["valid"], false);
    assert!(json(&bad)["witness"].is_array());
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("collinear.json");
    std::fs::write(&inst, r#"{"dim": 2, "points": [[0, 0], [1, 1], [2, 2], [5, 0]]}"#).unwrap();
    let out = epsnet(&["build", "-i", inst.to_str().unwrap(), "--eps", "1/2", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let good = gen(dir.path(), 10, 2);
    assert_eq!(epsnet(&["build", "-i", &good, "--eps", "3/2", "--seed", "0"]).status.code(), Some(2));
    assert_eq!(epsnet(&["build", "-i", "missing.json", "--eps", "1/2", "--seed", "0"]).status.code(), Some(2));
}

#[test]
fn envelope_and_dual_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), 40, 3);
    let env = epsnet(&["diagnose-envelope", "-i", &inst, "--eps", "1/5", "--seed", "3"]);
    assert!(env.status.success(), "{}", String::from_utf8_lossy(&env.stdout));
    let v = json(&env);
    assert_eq!(v["sides"].as_array().unwrap().len(), 2);
    assert_eq!(v["sides"][0]["checks"]["all_on_envelope"], true);

    let dual = epsnet(&["diagnose-dual", "-i", &inst, "--eps", "1/5", "--seed", "3", "--side", "lower"]);
    assert!(dual.status.success());
    let v = json(&dual);
    assert_eq!(v["sides"][0]["checks"]["separated"], true);
    assert_eq!(v["config"]["eps"], "1/5");
}

#[test]
fn pipeline_elekes_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), 20, 5);
    let p = epsnet(&["pipeline-dual", "-i", &inst, "--eps", "1/2", "--seed", "5"]);
    assert!(p.status.success(), "{}", String::from_utf8_lossy(&p.stderr));
    assert_eq!(json(&p)["valid"], true);

    let e = epsnet(&["elekes", "--k", "3", "--summary"]);
    assert!(e.status.success());
    assert_eq!(json(&e)["family_size"], 27);
    assert_eq!(epsnet(&["elekes", "--k", "1"]).status.code(), Some(2));

    let csv = dir.path().join("sweep.csv");
    let s = epsnet(&["sweep", "--n", "20", "--eps", "1,1/4", "--seeds", "1,2", "--out", csv.to_str().unwrap()]);
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stderr));
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "generator,n,dim,epsilon,beta,seed,family_size,net_size,baseline_size,valid,millis"
    );
    assert_eq!(lines.count(), 4);
}
