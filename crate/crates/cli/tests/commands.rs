use std::process::{Command, Output};

use serde_json::Value;

fn k3e(args: &[&str], cache: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_k3e")).args(args).env("K3E_CACHE", cache).output().expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let dir = tempfile::tempdir().unwrap();
    let out = k3e(args, dir.path());
    let code = out.status.code().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let v = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{:?}: {} in {:?}\nstderr: {}", args, e, text, String::from_utf8_lossy(&out.stderr)));
    (code, v)
}

fn code(args: &[&str]) -> i32 {
    let dir = tempfile::tempdir().unwrap();
    k3e(args, dir.path()).status.code().unwrap()
}

fn schema() -> jsonschema::JSONSchema {
    let text = include_str!("../schemas/report.schema.json");
    let v: Value = serde_json::from_str(text).unwrap();
    jsonschema::JSONSchema::compile(&v).expect("schema compiles")
}

fn assert_valid(v: &Value) {
    let s = schema();
    let msgs: Vec<String> = match s.validate(v) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("report for {} does not match the schema: {:?}", v["command"], msgs);
}

#[test]
fn lattice_info_of_builtins() {
    let (c, v) = report(&["lattice", "info", "E8"]);
    assert_eq!(c, 0);
    assert_eq!(v["verdicts"]["determinant"], 1);
    assert_eq!(v["verdicts"]["roots"], 240);
    assert_eq!(v["verdicts"]["minimum"], 2);
    let (_, v) = report(&["lattice", "info", "A1^8"]);
    assert_eq!(v["verdicts"]["determinant"], 256);
    assert_eq!(v["verdicts"]["discriminant_form"]["orders"], serde_json::json!([2, 2, 2, 2, 2, 2, 2, 2]));
    let (_, v) = report(&["lattice", "info", "[[-4,2],[2,-4]]"]);
    assert_eq!(v["verdicts"]["determinant"], 12);
    assert_eq!(v["verdicts"]["roots"], 0);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["lattice", "info", "{\"gram\": [[-2,1]"]), 2);
    assert_eq!(code(&["lattice", "info", "[[-2,1],[0,-2]]"]), 3);
    assert_eq!(code(&["lattice", "info", "/no/such/file.json"]), 2);
    assert_eq!(code(&["nef", "[[-4,0],[0,-4]]", "4,1,1,1"]), 3);
    assert_eq!(code(&["nef", "[[-4,0],[0,-4]]", "4,x"]), 2);
    assert_eq!(code(&["pipeline", "overlattices", "D4", "--group", "Z3"]), 3);
    assert_eq!(code(&["pipeline", "candidates", "--from-rank", "1"]), 3);
    assert_eq!(code(&["reproduce", "no-such-table"]), 3);
    assert_eq!(code(&["frobnicate"]), 2);
}

#[test]
fn rank3_single_and_scan() {
    let (_, v) = report(&["rank3", "classify", "13"]);
    assert_eq!(v["verdicts"]["zero_entropy"], true);
    let (_, v) = report(&["rank3", "classify", "8"]);
    assert_eq!(v["verdicts"]["zero_entropy"], false);
    assert_eq!(v["verdicts"]["prime_power"], true);
    assert!(!v["witnesses"].as_array().unwrap().is_empty());

    let dir = tempfile::tempdir().unwrap();
    let out = k3e(&["rank3", "classify", "--scan", "200"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,zero_entropy,condition_c,prime_power,fibration_classes"));
    let zero: Vec<i64> = lines.filter(|l| l.split(',').nth(1) == Some("true")).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    let want: Vec<i64> = k3e_core::classify::rank3::L1.iter().copied().filter(|&k| k <= 200).collect();
    assert_eq!(zero, want);
}

#[test]
fn nef_fibrations_sections() {
    let (_, v) = report(&["nef", "[[-8,0],[0,-6]]", "25,12,6,2"]);
    assert_eq!(v["verdicts"]["status"], "nef-maximal-rank");
    let (_, v) = report(&["nef", "{\"L\": {\"gram\": [[-4,0],[0,-4]]}}", "{\"x\": 4, \"y\": 2, \"z\": [1, 1]}"]);
    assert_eq!(v["verdicts"]["status"], "nef-with-orthogonal-root");

    let (_, v) = report(&["fibrations", "[[-4,0],[0,-4]]", "--beta", "2"]);
    assert_eq!(v["verdicts"]["count"], 1);

    let (c, v) = report(&["sections", "[[-8]]", "4,2,1"]);
    assert_eq!(c, 0);
    assert!(v["verdicts"]["section"].is_null());
    assert_eq!(v["verdicts"]["exhausted"], true);
    assert_eq!(code(&["--strict", "sections", "[[-8]]", "4,2,1"]), 5);
}

#[test]
fn genus_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| -> Value { serde_json::from_slice(&k3e(args, dir.path()).stdout).unwrap() };
    let v = run(&["genus", "explore", "A1^9"]);
    assert_eq!(v["verdicts"]["count"], 2);
    assert_eq!(v["verdicts"]["complete"], true);
    assert_eq!(v["cache"]["misses"], 1);
    let again = run(&["genus", "explore", "A1^9"]);
    assert_eq!(again["cache"]["hits"], 1);
    assert_eq!(again["verdicts"], v["verdicts"]);

    let u = run(&["genus", "unique", "A1^8"]);
    assert_eq!(u["verdicts"]["uniqueness"]["verdict"], "true");

    let info = run(&["cache", "info"]);
    assert_eq!(info["verdicts"]["entries"], 2);
    let cleared = run(&["cache", "clear"]);
    assert_eq!(cleared["verdicts"]["removed"], 2);
    assert_eq!(run(&["cache", "info"])["verdicts"]["entries"], 0);
}

#[test]
fn reproduce_tables() {
    for t in ["L1", "root-discriminants", "rank2-candidates"] {
        let (c, v) = report(&["reproduce", t]);
        assert_eq!(c, 0, "{}", t);
        assert_eq!(v["verdicts"]["mismatches"], 0);
    }
    let (c, v) = report(&["reproduce", "fibration-counts", "--picard", "4"]);
    assert_eq!(c, 0);
    assert_eq!(v["verdicts"]["rows"].as_array().unwrap().len(), 10);
    // two rows of Picard rank 5 disagree with the embedded table
    let (c, v) = report(&["reproduce", "fibration-counts", "--picard", "5"]);
    assert_eq!(c, 4);
    assert_eq!(v["verdicts"]["mismatches"], 2);
}

#[test]
fn pipelines() {
    let (_, v) = report(&["pipeline", "candidates", "--from-rank", "2"]);
    assert_eq!(v["verdicts"]["rank"], 3);
    assert_eq!(v["verdicts"]["survivors"], 7);
    assert_eq!(v["seed"], 0);

    let (_, v) = report(&["pipeline", "overlattices", "A1^4", "--group", "Z2"]);
    assert!(v["verdicts"]["census"]["overlattices"].as_array().unwrap().is_empty());
    let (_, v) = report(&["pipeline", "overlattices", "A1^8", "--group", "Z2"]);
    assert_eq!(v["verdicts"]["census"]["overlattices"].as_array().unwrap().len(), 1);
}

#[test]
fn catalog_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cat.json");
    let p = path.to_str().unwrap();
    let (c, v) = report(&["catalog", "generate", "--rank", "3", "--max-det", "40", "--out", p]);
    assert_eq!(c, 0);
    let n = v["verdicts"]["count"].as_u64().unwrap();
    assert!(n > 0);
    let (c, v) = report(&["catalog", "check", p]);
    assert_eq!(c, 0);
    assert_eq!(v["verdicts"]["entries"].as_u64().unwrap(), n);

    // rank 9 is beyond the spot-check range
    std::fs::write(&path, r#"[{"name": "bad", "gram": [[-2,0,0,0,0,0,0,0,0],[0,-2,0,0,0,0,0,0,0],[0,0,-2,0,0,0,0,0,0],[0,0,0,-2,0,0,0,0,0],[0,0,0,0,-2,0,0,0,0],[0,0,0,0,0,-2,0,0,0],[0,0,0,0,0,0,-2,0,0],[0,0,0,0,0,0,0,-2,0],[0,0,0,0,0,0,0,0,-2]]}]"#).unwrap();
    let (_, v) = report(&["catalog", "check", p]);
    assert_eq!(v["verdicts"]["checked"], 0);
    std::fs::write(&path, "[{\"name\": 1}]").unwrap();
    assert_eq!(code(&["catalog", "check", p]), 2);
}

#[test]
fn reports_match_the_schema() {
    let runs: [&[&str]; 10] = [
        &["lattice", "info", "D4"],
        &["rank3", "classify", "30"],
        &["nef", "[[-8,0],[0,-6]]", "25,12,6,2"],
        &["fibrations", "[[-4,0],[0,-4]]", "--beta", "2", "--sections"],
        &["sections", "[[-4,0],[0,-4]]", "4,2,1,1"],
        &["genus", "unique", "A1^4"],
        &["reproduce", "root-discriminants"],
        &["pipeline", "overlattices", "A1^8", "--group", "Z2"],
        &["catalog", "generate", "--rank", "2", "--max-det", "20"],
        &["cache", "info"],
    ];
    for args in runs {
        let (_, v) = report(args);
        assert_valid(&v);
    }
}

#[test]
fn output_is_deterministic() {
    let strip = |mut v: Value| {
        v["timings"] = Value::Null;
        if v["cache"].is_object() {
            v["cache"]["dir"] = Value::Null;
        }
        v
    };
    for args in [&["pipeline", "candidates", "--from-rank", "2", "--seed", "3"][..], &["rank3", "classify", "210"], &["genus", "explore", "A1^2+A2"]] {
        let (_, a) = report(args);
        let (_, b) = report(args);
        assert_eq!(strip(a), strip(b), "{:?}", args);
    }
}
