use std::path::PathBuf;
use std::process::Command;

use witness_contracts_cli::run;

fn corpus(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/corpus")
        .join(rel)
        .display()
        .to_string()
}

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("witness-contracts").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn lint_clean_pair_is_silent() {
    let (code, out, err) = invoke(&[
        "lint",
        &corpus("contracts/product_ok.yml"),
        &corpus("programs/product.c"),
    ]);
    assert_eq!((code, out.as_str(), err.as_str()), (0, "", ""));
}

#[test]
fn lint_findings_exit_3() {
    let (code, out, _) = invoke(&["lint", &corpus("lint/R4_pos.yml"), &corpus("programs/lintprog.c")]);
    assert_eq!(code, 3);
    assert!(out.contains("[R4]"), "{out}");
    let (code, out, _) = invoke(&[
        "--format",
        "json",
        "lint",
        &corpus("lint/R5_pos.yml"),
        &corpus("programs/lintprog.c"),
    ]);
    assert_eq!(code, 3);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["code"], "R5");
    assert_eq!(v[0]["severity"], "error");
    assert_eq!(v[0]["path"], "content[0].invariant.ensures");
    assert_eq!(v[0]["position"]["line"], 4);
}

#[test]
fn json_lint_of_clean_pair_is_empty_array() {
    let (code, out, _) = invoke(&[
        "--format",
        "json",
        "lint",
        &corpus("v20/product_loop.yml"),
        &corpus("programs/product.c"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "[]");
}

#[test]
fn validate_divide_exhaustive() {
    let (code, out, _) = invoke(&[
        "--format",
        "json",
        "validate",
        &corpus("contracts/divide_ok.yml"),
        &corpus("programs/divide.c"),
        "--exhaustive",
        "-8",
        "7",
        "4",
    ]);
    assert_eq!(code, 0, "{out}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "no_violation_found");
    assert_eq!(v["stats"]["inputs_explored"], 256);
}

#[test]
fn validate_violation_exit_1() {
    let (code, out, _) = invoke(&[
        "--format",
        "json",
        "validate",
        &corpus("contracts/product_mut.yml"),
        &corpus("programs/product_mut.c"),
    ]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["entry_index"], 0);
    assert_eq!(v["clause"], "ensures");
    assert_eq!(v["input_vector"], serde_json::json!([-8, 0]));
    assert!(v["trace"].as_array().unwrap().len() > 2);
}

#[test]
fn validate_text_output() {
    let (code, out, _) = invoke(&[
        "validate",
        &corpus("empty/failing.yml"),
        &corpus("programs/failing.c"),
        "--sequential",
    ]);
    assert_eq!(code, 1);
    assert!(
        out.starts_with("verdict: violated\nfailed: program_assert\ninput vector: [-3]\n"),
        "{out}"
    );
}

#[test]
fn validate_unknown_exit_2() {
    let (code, out, _) = invoke(&[
        "--format",
        "json",
        "validate",
        &corpus("contracts/product_ok.yml"),
        &corpus("programs/product.c"),
        "--step-limit",
        "3",
    ]);
    assert_eq!(code, 2, "{out}");
    assert!(out.contains("\"unknown\""));
}

#[test]
fn validate_random() {
    let args = [
        "--format",
        "json",
        "validate",
        &corpus("contracts/abs_bad.yml"),
        &corpus("programs/abs.c"),
        "--random",
        "11",
        "200",
    ];
    let (code, first, _) = invoke(&args);
    let (_, second, _) = invoke(&args);
    assert_eq!(code, 1);
    assert_eq!(first, second);
}

#[test]
fn validate_on_lint_errors_exits_3() {
    let (code, _, _) = invoke(&["validate", &corpus("lint/R1_pos.yml"), &corpus("programs/lintprog.c")]);
    assert_eq!(code, 3);
}

#[test]
fn instrument_writes_c() {
    let dir = tempfile::tempdir().unwrap();
    let out_c = dir.path().join("out.c");
    let (code, _, _) = invoke(&[
        "instrument",
        &corpus("contracts/divide_ok.yml"),
        &corpus("programs/divide.c"),
        "-o",
        out_c.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out_c).unwrap();
    assert!(text.contains("int __wit_pre_g = g;"), "{text}");
    assert!(text.contains("assert(g < __wit_pre_g);"), "{text}");
}

#[test]
fn lower_reports_result_ref() {
    let (code, out, _) = invoke(&[
        "--format",
        "json",
        "lower",
        &corpus("lowering/result.yml"),
        &corpus("programs/product.c"),
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["residue"][0]["reason"], "RESULT_REF");
    assert!(v["witness"].as_str().unwrap().contains("format_version: \"2.0\""));
}

#[test]
fn lower_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let yml = dir.path().join("low.yml");
    let res = dir.path().join("res.json");
    let (code, out, err) = invoke(&[
        "lower",
        &corpus("lowering/old.yml"),
        &corpus("programs/divide.c"),
        "-o",
        yml.to_str().unwrap(),
        "--residue",
        res.to_str().unwrap(),
    ]);
    assert_eq!((code, out.as_str(), err.as_str()), (0, "", ""));
    let residue: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&res).unwrap()).unwrap();
    assert_eq!(residue["residue"][0]["reason"], "OLD_REF");
    assert!(std::fs::read_to_string(&yml).unwrap().contains("content: []"));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(invoke(&["validate", "--frobnicate"]).0, 64);
    assert_eq!(
        invoke(&["lint", "/nonexistent.yml", &corpus("programs/product.c")]).0,
        64
    );
    assert_eq!(
        invoke(&[
            "validate",
            &corpus("v20/product_loop.yml"),
            &corpus("programs/product.c"),
            "--exhaustive",
            "3",
            "1",
            "2"
        ])
        .0,
        64
    );
}

#[test]
fn outputs_are_deterministic() {
    let args = [
        "--format",
        "json",
        "validate",
        &corpus("contracts/accumulate_bad.yml"),
        &corpus("programs/accumulate.c"),
    ];
    assert_eq!(invoke(&args), invoke(&args));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_witness-contracts");
    let status = Command::new(bin)
        .args(["validate", &corpus("contracts/max_bad.yml"), &corpus("programs/max.c")])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    let colored = Command::new(bin)
        .env("WITNESS_CONTRACTS_COLOR", "1")
        .args(["validate", &corpus("contracts/max_ok.yml"), &corpus("programs/max.c")])
        .output()
        .unwrap();
    assert_eq!(colored.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&colored.stdout).contains("\x1b[32m"));
}
