//! End-to-end tests of the binary: exit codes, JSON schemas, and
//! byte-level determinism.

use causalkit_core::gallery::{builtin_fixtures, write_pair};
use causalkit_core::io::{write_graph, write_model};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_causalkit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("causalkit-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Writes the flu certificate's first model (and its CFD) to disk.
fn flu_model_file(dir: &Path) -> PathBuf {
    let fixtures = builtin_fixtures();
    let flu = fixtures.iter().find(|f| f.id == "prop4-flu").unwrap();
    let pair = &flu.pairs[0];
    let path = dir.join("flu_a.json");
    std::fs::write(&path, write_model(&pair.model_a, &pair.constraints)).unwrap();
    path
}

#[test]
fn do_on_a_root_equals_infer_given() {
    let dir = temp_dir("root");
    let model = flu_model_file(&dir);
    let model = model.to_str().unwrap();
    // C is a root, so conditioning and intervening agree
    let do_out = run(&[
        "--json", "do", "-m", model, "--set", "C=0", "--query", "R=0",
    ]);
    assert!(do_out.status.success());
    let do_json: serde_json::Value = serde_json::from_str(&stdout(&do_out)).unwrap();
    assert_eq!(do_json["schema_version"], 1);
    let infer_out = run(&[
        "--json",
        "infer",
        "-m",
        model,
        "--targets",
        "R",
        "--given",
        "C=0",
    ]);
    assert!(infer_out.status.success());
    let infer_json: serde_json::Value = serde_json::from_str(&stdout(&infer_out)).unwrap();
    let entry = infer_json["entries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["assignment"]["R"] == "0")
        .unwrap();
    assert_eq!(do_json["p"], entry["p"]);
}

#[test]
fn verify_pair_passes_and_shows_the_marginals() {
    let dir = temp_dir("pair");
    let fixtures = builtin_fixtures();
    let flu = fixtures.iter().find(|f| f.id == "prop4-flu").unwrap();
    let path = dir.join("pair.json");
    std::fs::write(&path, write_pair(&flu.pairs[0])).unwrap();
    let out = run(&["verify-pair", "-p", path.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["effect_a"], "1/2");
    assert_eq!(report["effect_b"], "99/100");
    let text = stdout(&out);
    assert!(text.contains("1/16") && text.contains("99/800") && text.contains("1/800"));
}

#[test]
fn verify_pair_failure_exits_one() {
    let dir = temp_dir("pairfail");
    let fixtures = builtin_fixtures();
    let flu = fixtures.iter().find(|f| f.id == "prop4-flu").unwrap();
    // flip the expectation: the pair does separate, so this must fail
    let text = write_pair(&flu.pairs[0]).replace("\"separated\"", "\"not-separated\"");
    let path = dir.join("pair.json");
    std::fs::write(&path, text).unwrap();
    let out = run(&["verify-pair", "-p", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_exit_codes_follow_the_report() {
    let dir = temp_dir("check");
    let model = flu_model_file(&dir);
    let model = model.to_str().unwrap();
    assert!(run(&["check", "-m", model]).status.success());
    // a CFD context where the CPT is soft: violation, exit 1
    let extra = dir.join("extra.json");
    std::fs::write(
        &extra,
        r#"{"constraints":[{"type":"cfd","child":"F","p1":["T"],"context":{"C":"1"}}]}"#,
    )
    .unwrap();
    let out = run(&["check", "-m", model, "-c", extra.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    // malformed constraint file: input error, exit 2
    std::fs::write(&extra, "{not json").unwrap();
    let out = run(&["check", "-m", model, "-c", extra.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sampling_is_byte_deterministic() {
    let dir = temp_dir("sample");
    let fixtures = builtin_fixtures();
    let flu = fixtures.iter().find(|f| f.id == "prop4-flu").unwrap();
    let spec = flu.sampling.as_ref().unwrap();
    let graph = dir.join("graph.json");
    std::fs::write(&graph, write_graph(&spec.graph, &spec.constraints)).unwrap();
    let (s1, s2) = (dir.join("s1.json"), dir.join("s2.json"));
    for out in [&s1, &s2] {
        let status = run(&[
            "sample",
            "-g",
            graph.to_str().unwrap(),
            "--seed",
            "11",
            "-o",
            out.to_str().unwrap(),
        ]);
        assert!(status.status.success());
    }
    assert_eq!(
        std::fs::read(&s1).unwrap(),
        std::fs::read(&s2).unwrap(),
        "same seed must give identical bytes"
    );
    // the sampled model satisfies the embedded constraints
    assert!(run(&["check", "-m", s1.to_str().unwrap()]).status.success());
}

#[test]
fn feliminate_verifies_context_and_writes_output() {
    let dir = temp_dir("felim");
    let model = flu_model_file(&dir);
    let out_path = dir.join("elim.json");
    let out = run(&[
        "feliminate",
        "-m",
        model.to_str().unwrap(),
        "--var",
        "F",
        "--context",
        "C=0",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out_path.exists());
    // the flu CPT is soft at C=1, so that context must be rejected
    let out = run(&[
        "feliminate",
        "-m",
        model.to_str().unwrap(),
        "--var",
        "F",
        "--context",
        "C=1",
        "-o",
        dir.join("elim2.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_estimand_binds_placeholders() {
    let dir = temp_dir("eval");
    let model = flu_model_file(&dir);
    let formula = dir.join("formula.txt");
    std::fs::write(&formula, "sum_{T} (P(T) * P(R=$r | T, C=0, D=0))").unwrap();
    // unbound placeholder: usage error
    let out = run(&[
        "eval-estimand",
        "-m",
        model.to_str().unwrap(),
        "-e",
        formula.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "--json",
        "eval-estimand",
        "-m",
        model.to_str().unwrap(),
        "-e",
        formula.to_str().unwrap(),
        "--bind",
        "r=0",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["p"], "1/2");
}

#[test]
fn transforms_round_trip_through_files() {
    let dir = temp_dir("transform");
    let model = flu_model_file(&dir);
    let ext = dir.join("ext.json");
    let out = run(&[
        "extend-state",
        "-m",
        model.to_str().unwrap(),
        "--var",
        "F",
        "--base",
        "0",
        "--eps",
        "1/3",
        "-o",
        ext.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // extended model still loads and checks cleanly
    assert!(run(&["check", "-m", ext.to_str().unwrap()])
        .status
        .success());
    let perm = dir.join("perm.json");
    let out = run(&[
        "permute",
        "-m",
        model.to_str().unwrap(),
        "--var",
        "C",
        "--map",
        "0:1,1:0",
        "-o",
        perm.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // the rewritten CFD context moves with the permutation
    assert!(run(&["check", "-m", perm.to_str().unwrap()])
        .status
        .success());
}

#[test]
fn gallery_commands_work() {
    let out = run(&["gallery", "list"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("prop4-flu"));
    let out = run(&[
        "gallery",
        "verify",
        "--id",
        "prop2-salary",
        "--samples",
        "5",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS"));
    let out = run(&["gallery", "verify", "--id", "no-such-fixture"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_files_are_usage_errors() {
    let out = run(&["infer", "-m", "/nonexistent.json", "--targets", "A"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "do",
        "-m",
        "/nonexistent.json",
        "--set",
        "A=0",
        "--query",
        "B=0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
