use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn folner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_folner"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn integer_window_ratio_prints_bare_value() {
    let out = folner(&["group", "ratio", "--group", "z:box", "--n", "4", "--phi", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "0.8");
}

#[test]
fn ratio_trace_is_csv_with_header() {
    let out = folner(&["group", "ratio", "--group", "z:box", "--nmax", "3", "--phi", "2", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "n,window_len,ratio\n0,1,0.0\n1,2,0.0\n2,3,0.3333333333333333\n3,4,0.5\n");
}

#[test]
fn invariant_transport_on_cyclic_three_reports_small_gaps() {
    let out = folner(&["transport", "invariant", "--group", "cyclic:3", "--input", &data("z3_invariant_transport.json")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["passed"], true);
    assert_eq!(report["tolerances"]["tol"], 1e-7);
    let gaps = &report["result"]["gaps"];
    assert!(gaps["all_vs_invariant_couplings"].as_f64().unwrap() <= 1e-7);
    assert!(gaps["invariant_primal_vs_dual"].as_f64().unwrap() <= 1e-7);
}

#[test]
fn non_invariant_marginals_are_an_input_error() {
    let out = folner(&["transport", "invariant", "--group", "cyclic:3", "--input", &data("z3_transport.json")]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not invariant"));
}

#[test]
fn unknown_subcommand_exits_one() {
    assert_eq!(code(&folner(&["transport", "teleport"])), 1);
    assert_eq!(code(&folner(&["bogus"])), 1);
}

#[test]
fn malformed_inputs_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad_json = write(&dir, "bad.json", "{ \"cost\": [[0, 1], ");
    let bad_csv = write(&dir, "bad.csv", "a,b\n1,x\n");
    let ragged = write(&dir, "ragged.json", "{ \"cost\": [[0, 1], [1]] }");
    let unknown = write(&dir, "unknown.json", "{ \"cost\": [[0]], \"extra\": 1 }");
    for p in [&bad_json, &bad_csv, &ragged, &unknown] {
        let out = folner(&["transport", "solve", "--input", p.to_str().unwrap()]);
        assert_eq!(code(&out), 1, "{}", p.display());
    }
    assert_eq!(code(&folner(&["group", "ratio", "--group", "z:3", "--n", "1"])), 1);
}

#[test]
fn csv_table_input_and_output() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("plan.csv");
    let out = folner(&[
        "transport",
        "solve",
        "--input",
        &data("kernel.csv"),
        "--format",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let table = fs::read_to_string(&out_path).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("c0,c1,c2,c3"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!((r.iter().sum::<f64>() - 0.25).abs() < 1e-12);
    }
    let sidecar: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("plan.report.json")).unwrap()).unwrap();
    assert_eq!(sidecar["command"], "transport solve");
    assert_eq!(sidecar["tolerances"]["lp"]["feasibility"], 1e-9);
}

#[test]
fn csv_referenced_from_json_resolves_relative_to_the_document() {
    let dir = TempDir::new().unwrap();
    write(&dir, "cost.csv", "a,b\n0,2\n2,0\n");
    let doc = write(&dir, "doc.json", r#"{ "cost": "cost.csv", "p1": [0.5, 0.5], "p2": [0.5, 0.5] }"#);
    let out = folner(&["transport", "invariant", "--group", "cyclic:2", "--input", doc.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["result"]["solution"]["invariant_primal"], 0.0);
}

#[test]
fn reports_are_deterministic() {
    let runs = [
        vec!["test", "invariantize", "--group", "cyclic:2"],
        vec!["transport", "invariant", "--group", "cyclic:3"],
    ];
    let inputs = [data("swap_test.json"), data("z3_invariant_transport.json")];
    for (args, input) in runs.iter().zip(&inputs) {
        let mut full = args.clone();
        full.extend(["--input", input.as_str()]);
        let a = folner(&full);
        let b = folner(&full);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn unconverged_ergodic_average_is_a_verification_failure() {
    let out = folner(&[
        "ergodic",
        "--group",
        "z:box",
        "--input",
        &data("rotation.json"),
        "--tol",
        "1e-9",
        "--nmax",
        "50",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn ergodic_rotation_converges_to_zero() {
    let out = folner(&["ergodic", "--group", "z:box", "--input", &data("rotation.json"), "--tol", "1e-3"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["result"]["limit"], serde_json::json!([0.0, 0.0]));
    assert_eq!(report["result"]["source"], "fixed_space_projection");
}

#[test]
fn permutohedron_queries() {
    let input = data("permutohedron.json");
    let member = json(&folner(&["orbitope", "member", "--group", "sym:3", "--input", &input]));
    assert_eq!(member["result"]["inside"], true);
    let support = json(&folner(&["orbitope", "support", "--group", "sym:3", "--input", &input]));
    assert_eq!(support["result"]["value"], 3.0);
    let inv = json(&folner(&["orbitope", "invariant", "--group", "sym:3", "--input", &input]));
    let v: Vec<f64> = serde_json::from_value(inv["result"]["value"].clone()).unwrap();
    assert!(v.iter().all(|x| (x - 4.0 / 3.0).abs() < 1e-12));
}

#[test]
fn bit_swap_decomposition() {
    let out = folner(&["kernel", "decompose", "--group", "cyclic:2", "--input", &data("bitswap_measure.json"), "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "orbit,size,weight\n0,1,0.1\n1 2,2,0.6\n3,1,0.3\n");
}

#[test]
fn kernel_symmetrize_and_mmd() {
    let out = folner(&["kernel", "symmetrize", "--group", "cyclic:4", "--input", &data("kernel.csv")]);
    assert_eq!(code(&out), 0);
    let dir = TempDir::new().unwrap();
    let doc = write(
        &dir,
        "mmd.json",
        r#"{ "kernel": [[1, 0], [0, 1]], "p": [1, 0], "q": [0, 1] }"#,
    );
    let out = folner(&["kernel", "mmd", "--input", doc.to_str().unwrap()]);
    let m = json(&out)["result"]["mmd"].as_f64().unwrap();
    assert!((m - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn cocycle_commands() {
    let avg = folner(&["cocycle", "average", "--group", "sym:2", "--input", &data("skew_pairs.json"), "--format", "csv"]);
    assert_eq!(code(&avg), 0);
    assert_eq!(stdout(&avg), "c0\n0.0\n-1.0\n-2.0\n1.0\n0.0\n-1.0\n2.0\n1.0\n0.0\n");

    let dir = TempDir::new().unwrap();
    let doc = write(
        &dir,
        "apply.json",
        r#"{ "carrier": { "kind": "tuples", "base": 2 }, "cocycle": { "kind": "sign", "dim": 1 },
             "x": [[1], [2], [3], [4]], "element": "1,0" }"#,
    );
    let out = json(&folner(&["cocycle", "apply", "--group", "sym:2", "--input", doc.to_str().unwrap()]));
    assert_eq!(out["result"]["value"], serde_json::json!([[-1.0], [-3.0], [-2.0], [-4.0]]));

    let k = folner(&["cocycle", "equivariant-kernel", "--group", "cyclic:3", "--input", &data("markov.json")]);
    assert_eq!(code(&k), 0);
    assert_eq!(json(&k)["result"]["risk"]["holds"], true);
}

#[test]
fn hunt_stein_commands() {
    let input = data("swap_test.json");
    let best = json(&folner(&["test", "maximin", "--group", "cyclic:2", "--input", &input]));
    let value = best["result"]["test"]["value"].as_f64().unwrap();
    let inv = folner(&["test", "invariantize", "--group", "cyclic:2", "--input", &input]);
    assert_eq!(code(&inv), 0);
    let inv = json(&inv);
    assert!((inv["result"]["invariant"]["value_bar"].as_f64().unwrap() - value).abs() <= 1e-9);
}

#[test]
fn transport_extreme_and_symmetrize() {
    let dir = TempDir::new().unwrap();
    let doc = write(&dir, "plan.json", r#"{ "plan": [[0.5, 0.0], [0.0, 0.5]] }"#);
    let ext = json(&folner(&["transport", "extreme", "--group", "cyclic:2", "--input", doc.to_str().unwrap()]));
    assert_eq!(ext["result"]["extreme"], true);
    let doc = write(&dir, "plan2.json", r#"{ "plan": [[0.4, 0.1], [0.1, 0.4]] }"#);
    let ext = json(&folner(&["transport", "extreme", "--group", "cyclic:2", "--input", doc.to_str().unwrap()]));
    assert_eq!(ext["result"]["extreme"], false);
    let doc = write(&dir, "plan3.json", r#"{ "plan": [[0.5, 0.0], [0.0, 0.5]], "carrier_y": { "kind": "natural" } }"#);
    let sym = folner(&["transport", "symmetrize", "--group", "cyclic:2", "--input", doc.to_str().unwrap()]);
    assert_eq!(code(&sym), 0);
    assert_eq!(json(&sym)["result"]["was_invariant"], true);
}

#[test]
fn verify_all_passes_with_seed_seven() {
    let out = folner(&["verify", "all", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    let criteria = report["result"]["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 10);
    assert!(criteria.iter().all(|c| c["passed"] == true));
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().filter(|l| l.contains("PASS")).count(), 10);
}
