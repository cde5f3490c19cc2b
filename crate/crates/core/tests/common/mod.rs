#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use serde_json::Value;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn seed_dir() -> PathBuf {
    fixtures().join("seeds")
}

/// Run `script` under python3 with `input` as JSON on stdin; parse stdout.
pub fn python_json(script: &str, input: &Value) -> Value {
    let mut child = Command::new("python3")
        .arg("-c")
        .arg(script)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("python3 must be on PATH for the oracle tests");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.to_string().as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(
        out.status.success(),
        "python3 failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("python3 printed JSON")
}

/// `ast.parse` each source; `null` on success, the error text otherwise.
const AST_PARSE: &str = r#"
import ast, json, sys
out = []
for src in json.load(sys.stdin):
    try:
        ast.parse(src)
        out.append(None)
    except SyntaxError as e:
        out.append(f"{e.lineno}:{e.offset}: {e.msg}")
json.dump(out, sys.stdout)
"#;

pub fn python_parse_errors(sources: &[String]) -> Vec<Option<String>> {
    let v = python_json(AST_PARSE, &serde_json::json!(sources));
    serde_json::from_value(v).unwrap()
}

/// Call `name` on every input of `cases` in each program, in a fresh
/// namespace. Each result is `[kind, repr-or-exception, stdout]`.
const EXECUTE: &str = r#"
import contextlib, copy, io, json, sys
req = json.load(sys.stdin)
out = {}
for label, src in req["programs"].items():
    ns = {}
    exec(compile(src, label, "exec"), ns)
    fn = ns[req["name"]]
    results = []
    for args in req["cases"]:
        buf = io.StringIO()
        try:
            with contextlib.redirect_stdout(buf):
                value = fn(*copy.deepcopy(args))
            results.append(["ok", repr(value), buf.getvalue()])
        except Exception as e:
            results.append(["raise", type(e).__name__, buf.getvalue()])
    out[label] = results
json.dump(out, sys.stdout)
"#;

pub type ExecResult = (String, String, String);

pub fn python_execute(
    name: &str,
    programs: &BTreeMap<String, String>,
    cases: &Value,
) -> BTreeMap<String, Vec<ExecResult>> {
    let v = python_json(
        EXECUTE,
        &serde_json::json!({"name": name, "programs": programs, "cases": cases}),
    );
    serde_json::from_value(v).unwrap()
}

/// Executable fixtures: seeds with a `<name>.cases.json` input suite.
pub fn executable_fixtures() -> Vec<(String, String, Value)> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(seed_dir()).unwrap() {
        let path = entry.unwrap().path();
        let Some(stem) = path.file_name().unwrap().to_str().unwrap().strip_suffix(".cases.json") else {
            continue;
        };
        let source = std::fs::read_to_string(seed_dir().join(format!("{stem}.py"))).unwrap();
        let cases = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        out.push((stem.to_string(), source, cases));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[derive(Debug, Default)]
pub struct SemanticsReport {
    pub fixtures: usize,
    pub mutants: usize,
    pub per_scheme: BTreeMap<probe_core::mutate::SchemeId, usize>,
    pub failures: Vec<String>,
}

/// Mutate every executable fixture with every applicable scheme and compare
/// the mutants' behavior with the seed's under python3.
pub fn check_semantics() -> SemanticsReport {
    use probe_core::mutate::{applicable_to, mutate_source, SchemeId};

    let mut report = SemanticsReport::default();
    for (name, source, cases) in executable_fixtures() {
        report.fixtures += 1;
        let mut programs = BTreeMap::new();
        programs.insert("ORIGINAL".to_string(), source.clone());
        for scheme in applicable_to(&source).unwrap() {
            if scheme == SchemeId::Original {
                continue;
            }
            match mutate_source(&source, scheme, &Default::default()) {
                Ok(m) => {
                    programs.insert(scheme.to_string(), m);
                    *report.per_scheme.entry(scheme).or_default() += 1;
                    report.mutants += 1;
                }
                Err(e) => report.failures.push(format!("{name} {scheme}: {e}")),
            }
        }
        let results = python_execute(&name, &programs, &cases);
        let expected = &results["ORIGINAL"];
        assert_eq!(expected.len(), cases.as_array().unwrap().len());
        for (label, got) in &results {
            for (i, (want, have)) in expected.iter().zip(got).enumerate() {
                let same = if label == "INI" {
                    (&want.0, &want.1) == (&have.0, &have.1)
                } else {
                    want == have
                };
                if !same {
                    report
                        .failures
                        .push(format!("{name} {label} case {i}: {want:?} vs {have:?}"));
                }
            }
        }
    }
    report
}
