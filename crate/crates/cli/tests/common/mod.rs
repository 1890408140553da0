#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub const BIN: &str = env!("CARGO_BIN_EXE_rkr");

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn rkr(args: &[&str]) -> Run {
    rkr_env(args, &[])
}

pub fn rkr_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(BIN);
    cmd.args(args)
        .current_dir(manifest_dir())
        .env_remove("RKR_MAX_STATES");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawn rkr");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Runs and parses a JSON report, panicking with stderr on failure.
pub fn rkr_json(args: &[&str]) -> Value {
    let run = rkr(args);
    assert_eq!(run.code, 0, "rkr {args:?} failed: {}", run.stderr);
    serde_json::from_str(&run.stdout).expect("report is JSON")
}

pub fn mask_timestamp(mut report: Value) -> Value {
    if let Some(obj) = report.as_object_mut() {
        obj.insert("timestamp".into(), Value::String("<masked>".into()));
    }
    report
}

/// One golden invocation per subcommand.
pub const GOLDEN_CASES: &[(&str, &[&str])] = &[
    (
        "exact",
        &[
            "exact",
            "prediction",
            "--family",
            "uniform",
            "--M",
            "2",
            "--k",
            "1",
            "--j",
            "1",
            "--variant",
            "paper",
            "--verify",
        ],
    ),
    (
        "simulate",
        &[
            "simulate", "--family", "uniform", "--M", "3", "--k", "2", "--j", "1", "--seed", "7",
            "--reps", "2000",
        ],
    ),
    (
        "poisson-bound",
        &[
            "poisson-bound",
            "--pmf",
            "tests/data/pmf.json",
            "--i0",
            "2",
            "--k",
            "2",
            "--j",
            "1",
            "--n",
            "5",
            "--exact-tv",
        ],
    ),
    (
        "lll-check",
        &[
            "lll-check",
            "--family",
            "uniform",
            "--M",
            "4",
            "--i0",
            "2",
            "--k",
            "2",
            "--j",
            "1",
            "--n",
            "6",
        ],
    ),
    (
        "scan",
        &[
            "scan",
            "--input",
            "tests/data/seq_a.csv",
            "--k",
            "2",
            "--target",
            "fixed:3",
        ],
    ),
    (
        "analyze",
        &["analyze", "--input", "tests/data/seq_b.jsonl", "--k", "2"],
    ),
    (
        "compare",
        &["compare", "--family", "uniform", "--M", "2", "--k-max", "2"],
    ),
];

pub fn golden_path(name: &str) -> PathBuf {
    manifest_dir()
        .join("tests/golden")
        .join(format!("{name}.json"))
}

/// Compares a subcommand's output byte for byte (timestamp masked) to its
/// golden file. With `RKR_UPDATE_GOLDEN=1` the golden is rewritten instead.
pub fn check_golden(name: &str, args: &[&str]) -> Result<(), String> {
    let got = mask_timestamp(rkr_json(args));
    let path = golden_path(name);
    if std::env::var("RKR_UPDATE_GOLDEN").as_deref() == Ok("1") {
        let text = serde_json::to_string_pretty(&got).unwrap() + "\n";
        std::fs::write(&path, text).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let got = serde_json::to_string_pretty(&got).unwrap() + "\n";
    if got == want {
        return Ok(());
    }
    let line = got.lines().zip(want.lines()).position(|(a, b)| a != b);
    Err(match line {
        Some(i) => format!(
            "line {}: got {:?}, golden {:?}",
            i + 1,
            got.lines().nth(i).unwrap(),
            want.lines().nth(i).unwrap()
        ),
        None => "output and golden differ in length".into(),
    })
}

fn load(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn pmf_schema() -> Value {
    load(&manifest_dir().join("schemas/pmf.schema.json"))
}

pub fn report_validator() -> jsonschema::Validator {
    let pmf = pmf_schema();
    let id = pmf["$id"].as_str().unwrap().to_string();
    jsonschema::options()
        .with_resource(id, jsonschema::Resource::from_contents(pmf).unwrap())
        .build(&load(&manifest_dir().join("schemas/report.schema.json")))
        .expect("report schema compiles")
}

pub fn schema_errors(validator: &jsonschema::Validator, report: &Value) -> Vec<String> {
    validator
        .iter_errors(report)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect()
}

/// Induced error cases and the exit code each must produce.
/// (description, args, env, expected exit code)
pub type ExitCase = (
    &'static str,
    &'static [&'static str],
    &'static [(&'static str, &'static str)],
    i32,
);

pub const EXIT_CASES: &[ExitCase] = &[
    (
        "missing required flag",
        &["exact", "marginal", "--family", "uniform", "--M", "2"],
        &[],
        2,
    ),
    (
        "j above k",
        &[
            "exact", "marginal", "--family", "uniform", "--M", "2", "--k", "1", "--j", "2",
        ],
        &[],
        2,
    ),
    (
        "window without i0",
        &[
            "exact", "window", "--family", "uniform", "--M", "2", "--k", "1", "--j", "1",
        ],
        &[],
        2,
    ),
    (
        "bad budget variable",
        &[
            "exact", "marginal", "--family", "uniform", "--M", "2", "--k", "1", "--j", "1",
        ],
        &[("RKR_MAX_STATES", "lots")],
        2,
    ),
    (
        "budget exceeded",
        &[
            "exact", "marginal", "--family", "uniform", "--M", "3", "--k", "2", "--j", "1",
            "--verify",
        ],
        &[("RKR_MAX_STATES", "10")],
        3,
    ),
    (
        "zero marginal",
        &[
            "exact",
            "posterior",
            "--family",
            "uniform",
            "--M",
            "1",
            "--k",
            "1",
            "--j",
            "0",
        ],
        &[],
        3,
    ),
    (
        "unparseable value",
        &["analyze", "--input", "tests/data/bad.csv", "--k", "1"],
        &[],
        4,
    ),
    (
        "nonpositive value",
        &[
            "analyze",
            "--input",
            "tests/data/nonpositive.csv",
            "--k",
            "1",
        ],
        &[],
        4,
    ),
    (
        "sequence too short",
        &["analyze", "--input", "tests/data/short.csv", "--k", "2"],
        &[],
        4,
    ),
    (
        "missing file",
        &[
            "scan",
            "--input",
            "tests/data/absent.csv",
            "--k",
            "2",
            "--target",
            "random",
        ],
        &[],
        4,
    ),
];
