use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fbp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbp")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = fbp(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fbp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn inspect_example_algebra() {
    let r = report(&["inspect-algebra", "--builtin", "gf2-idempotent-reduct"]);
    assert_eq!(r["simple"], true);
    assert_eq!(r["abelian"], false);
    assert_eq!(r["idempotents"], serde_json::json!([0, 1]));
    assert_eq!(r["aut_order"], 1);
    assert_eq!(r["proper_subalgebras"], serde_json::json!([[0], [1]]));
    assert_eq!(r["verified"], true);
}

#[test]
fn inspect_from_file_matches_builtin() {
    let a = report(&["inspect-algebra", "--builtin", "gf4-idempotent-reduct"]);
    let path = scratch("alg.json");
    let alg = fbp::json::AlgebraJson::from_algebra(&fbp::algebra::builtin::gf4_idempotent_reduct());
    std::fs::write(&path, fbp::json::to_string(&alg)).unwrap();
    let b = report(&["inspect-algebra", "--alg", path.to_str().unwrap()]);
    assert_eq!(a, b);
}

#[test]
fn amalgamate_identity_pair() {
    let r = report(&["amalgamate"]);
    assert_eq!(r["m"], 1);
    assert_eq!(r["commutes"], true);
}

#[test]
fn amalgamate_from_files() {
    let phi = scratch("phi.json");
    let psi = scratch("psi.json");
    std::fs::write(&phi, r#"{"u":1,"v":2,"coords":[{"aut":[0,1],"src":0},{"aut":[0,1],"src":0}]}"#).unwrap();
    std::fs::write(&psi, r#"{"u":1,"v":2,"coords":[{"aut":[0,1],"src":0},{"idem":0}]}"#).unwrap();
    let r = report(&["amalgamate", "--builtin", "gf2-ring", "--phi", phi.to_str().unwrap(), "--psi", psi.to_str().unwrap()]);
    assert_eq!(r["m"], 3);
    assert_eq!(r["verified"], true);
}

#[test]
fn demo_is_deterministic_and_not_extendable() {
    let a = fbp(&["demo-example-2-3", "--depth", "6"]);
    let b = fbp(&["demo-example-2-3", "--depth", "6"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["extends_to_X"], false);
    let evidence = r["cluster_evidence"].as_array().unwrap();
    assert_eq!(evidence.len(), 6);
    assert!(evidence.iter().all(|w| w["near"].as_array().unwrap().len() == 2));
}

#[test]
fn same_seed_same_report() {
    for cmd in [&["factor-homeo", "--seed", "7"][..], &["extend-homogeneity", "--seed", "7", "--samples", "3"], &["fraisse-chain", "--seed", "7"]] {
        let a = fbp(cmd);
        let b = fbp(cmd);
        assert!(a.status.success(), "{cmd:?}");
        assert_eq!(a.stdout, b.stdout, "{cmd:?}");
    }
}

#[test]
fn factor_homeo_round_trips_sigma() {
    let r = report(&["factor-homeo", "--points", "2", "--seed", "3"]);
    let path = scratch("sigma.json");
    std::fs::write(&path, serde_json::to_string(&r["sigma"]).unwrap()).unwrap();
    let again = report(&["factor-homeo", "--points", "2", "--sigma", path.to_str().unwrap()]);
    assert_eq!(r, again);
}

#[test]
fn free_algebra_reports() {
    let r = report(&["free-algebra", "--builtin", "gf2-ring", "--rank", "2"]);
    assert_eq!(r["decomposition"]["verified"], true);
    assert_eq!(r["split"]["verified"], true);
    let e = report(&["free-algebra", "--rank", "1"]);
    assert_eq!(e["size"], 1);
    assert_eq!(e["split"], Value::Null);
}

#[test]
fn reduce_merges_equal_filters() {
    let r = report(&["reduce-idempotents", "--builtin", "gf2-ring", "--filters", "0,0"]);
    assert_eq!(r["target_of"], serde_json::json!([0, 0]));
    assert_eq!(r["target"]["filters"], serde_json::json!([0]));
    assert_eq!(r["homomorphism"], true);
}

#[test]
fn build_power_counts() {
    let r = report(&["build-power", "--builtin", "gf2-ring", "--filters", "0", "--depth", "2"]);
    assert_eq!(r["count"], 8);
    let listed = report(&["build-power", "--builtin", "gf2-ring", "--filters", "0", "--depth", "1", "--list"]);
    assert_eq!(listed["elements"].as_array().unwrap().len(), 2);
}

#[test]
fn bergman_growth_is_monotone() {
    let r = report(&["bergman-growth", "--depth", "3", "--steps", "10"]);
    let sizes: Vec<u64> = r["growth"]["sizes"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert!(sizes.windows(2).all(|p| p[0] <= p[1]));
    assert_eq!(r["growth"]["group_order"], 5040);
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("out.json");
    let out = fbp(&["amalgamate", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["m"], 1);
}

#[test]
fn errors_exit_nonzero() {
    let out = fbp(&["inspect-algebra", "--builtin", "no-such-algebra"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("no-such-algebra"));
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{").unwrap();
    assert_eq!(fbp(&["amalgamate", "--phi", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(fbp(&["build-power", "--filters", "0,2"]).status.code(), Some(2));
}
