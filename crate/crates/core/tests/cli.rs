use std::path::PathBuf;

use clap::Parser;
use loci::cli::{render, run, Cli, Format};
use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> String {
    root().join("fixtures").join(name).display().to_string()
}

fn invoke(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["loci"];
    all.extend_from_slice(args);
    let cli = Cli::try_parse_from(all).expect("arguments parse");
    let out = run(&cli);
    (out.status, out.report)
}

fn validate(report: &Value) {
    let name = if report.get("error").is_some() {
        "error".to_string()
    } else {
        report["command"].as_str().unwrap().to_string()
    };
    let path = root().join("schemas").join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    if let Err(errors) = compiled.validate(report) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{name} report violates its schema: {msgs:?}");
    };
}

#[test]
fn sum_of_geometric_series() {
    let geo = fixture("geo.pcf");
    let (status, r) = invoke(&["sum", "--input", &geo, "--mode", "q=2"]);
    assert_eq!(status, 0);
    assert_eq!(r["value"], "2");
    assert_eq!(r["validity"], "all");
    validate(&r);
}

#[test]
fn transfer_agrees() {
    let f = fixture("norm_s.pint");
    let (status, r) = invoke(&["transfer", "--input", &f, "--primes", "2,3", "--kind", "int"]);
    assert_eq!(status, 0);
    assert_eq!(r["agree"], true);
    validate(&r);
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = std::env::temp_dir().join(format!("loci-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.pf");
    std::fs::write(&bad, "exists y. x = 2*").unwrap();
    let (status, r) = invoke(&["qe", "--input", bad.to_str().unwrap()]);
    assert_eq!(status, 1);
    let msg = r["error"].as_str().unwrap();
    assert!(msg.contains("syntax error at 1:17"), "{msg}");
    validate(&r);
    let (status, _) = invoke(&["qe", "--input", dir.join("missing.pf").to_str().unwrap()]);
    assert_eq!(status, 1);
}

#[test]
fn unknown_flags_are_rejected() {
    assert!(Cli::try_parse_from(["loci", "qe", "--input", "x.pf", "--bogus"]).is_err());
    assert!(Cli::try_parse_from(["loci", "frobnicate"]).is_err());
}

#[test]
fn rectilinearization_check() {
    let even = fixture("even.pf");
    let (status, r) = invoke(&["rectilinearize", "--input", &even, "--params", "x", "--vars", "y", "--check", "6"]);
    assert_eq!(status, 0, "{r}");
    assert_eq!(r["check"]["ok"], true);
    validate(&r);
}

#[test]
fn counterexamples_exit_with_two() {
    // y^20 L^-y is summable, but its truncation at |y| <= 80 with q = 2 still
    // carries a large tail, so the truncated oracle disagrees
    let dir = std::env::temp_dir().join(format!("loci-cli-slow-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let slow = dir.join("slow.pcf");
    std::fs::write(&slow, "func slow(; y) { term coeff = 1, exp = -y, factors = [y^20]; domain y >= 0; }").unwrap();
    let (status, r) = invoke(&["verify", "--input", slow.to_str().unwrap()]);
    assert_eq!(status, 2, "{r}");
    assert_eq!(r["ok"], false);
    validate(&r);
}

#[test]
fn every_command_matches_its_schema_and_is_byte_stable() {
    let (geo, fam, pint, even) = (fixture("geo.pcf"), fixture("families.pcf"), fixture("norm_s.pint"), fixture("even.pf"));
    let jobs: Vec<Vec<&str>> = vec![
        vec!["qe", "--input", &even],
        vec!["rectilinearize", "--input", &even, "--params", "x", "--vars", "y"],
        vec!["sum", "--input", &geo],
        vec!["sum", "--input", &fam, "--name", "pow_s", "--mode", "q=3", "--at", "-2"],
        vec!["loci", "--input", &fam, "--name", "lin_pow_s", "--box", "-3..3"],
        vec!["interpolate", "--input", &fam, "--name", "pow_s"],
        vec!["padic-integrate", "--input", &pint],
        vec!["padic-integrate", "--input", &pint, "--backend", "fpt", "--p", "3", "--depth", "6", "--at", "1"],
        vec!["padic-locus", "--input", &pint, "--kind", "int,locint", "--box", "-2..2"],
        vec!["transfer", "--input", &pint, "--primes", "2", "--kind", "int,bdd", "--box", "-1..1"],
        vec!["verify", "--input", &fam, "--box", "-2..2"],
        vec!["verify", "--input", &even],
    ];
    for args in jobs {
        let (status, r) = invoke(&args);
        assert_eq!(status, 0, "{args:?}: {r}");
        validate(&r);
        let (_, again) = invoke(&args);
        assert_eq!(render(&r, Format::Json), render(&again, Format::Json), "{args:?}");
        assert_eq!(render(&r, Format::Text), render(&again, Format::Text), "{args:?}");
    }
}
