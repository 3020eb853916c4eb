mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pathforge::harness::pipeline::PathRecord;
use pathforge::harness::{RunReport, SolveStatus};
use pathforge::interp::PathVerdict;

use common::*;

fn pathforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn record(id: usize, status: SolveStatus, verdict: Option<PathVerdict>) -> PathRecord {
    PathRecord {
        file: "synthetic.py".into(),
        function: "f".into(),
        path_id: id,
        steps: 3,
        truncated: false,
        source: None,
        status,
        input: verdict.as_ref().map(|_| "x=1".into()),
        test_verdict: verdict,
        artifact: None,
        detail: None,
        time_ms: 1.0,
    }
}

/// 111 paths: 99 SAT, of which 97 execute and 70 follow their path.
fn table_report(k: usize) -> RunReport {
    let mut records = Vec::new();
    for i in 0..111 {
        let r = match i {
            0..70 => record(i, SolveStatus::Sat, Some(PathVerdict::PathCorrect)),
            70..97 => record(i, SolveStatus::Sat, Some(PathVerdict::ExecutionPassOnly)),
            97..99 => record(i, SolveStatus::Sat, Some(PathVerdict::Failed("IndexError".into()))),
            _ => record(i, SolveStatus::Unsat, None),
        };
        records.push(r);
    }
    RunReport::new("replay".into(), k, records, Vec::new())
}

fn bench(corpus: &Path, out: &Path, extra: &[&str]) -> RunReport {
    let mut args = vec!["bench", s(corpus), "--out", s(out)];
    if !extra.contains(&"--jobs") {
        args.extend(["--jobs", "2"]);
    }
    args.extend_from_slice(extra);
    let o = pathforge(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    RunReport::from_json(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

/// Per-path results without timing or output locations.
fn verdicts(r: &RunReport) -> Vec<(String, String, usize, SolveStatus, Option<PathVerdict>, Option<String>)> {
    r.records
        .iter()
        .map(|x| {
            (
                x.file.clone(),
                x.function.clone(),
                x.path_id,
                x.status,
                x.test_verdict.clone(),
                x.input.clone(),
            )
        })
        .collect()
}

fn copy_corpus(to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(corpus_dir()).unwrap() {
        let p = e.unwrap().path();
        fs::copy(&p, to.join(p.file_name().unwrap())).unwrap();
    }
}

#[test]
fn solve_path_exit_codes_and_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let two = write(tmp.path(), "classify.py", TWO_BRANCH);
    let o = pathforge(&["solve-path", s(&two), "--path", "0", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict: path-correct"));
    for ext in ["smt2", "map", "out", "model", "jsonl", "verdict"] {
        assert!(out.join(format!("classify.p0.{ext}")).is_file(), "missing .{ext}");
    }
    assert_eq!(fs::read_to_string(out.join("classify.p0.verdict")).unwrap(), "sat\tpath-correct\n");

    let narrow = write(tmp.path(), "narrow.py", NARROW);
    let (f, _) = function(NARROW);
    let dead = paths(&f)
        .iter()
        .position(|p| p.steps.get(2).and_then(|s| s.branch_taken) == Some(true))
        .unwrap();
    let o = pathforge(&["solve-path", s(&narrow), "--path", &dead.to_string(), "--out", s(&out)]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));

    let strconv = manifest_dir().join("tests/fixtures/str_convert.py");
    let o = pathforge(&["solve-path", s(&strconv), "--path", "0", "--bridge", "off", "--out", s(&out)]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
    assert!(stdout(&o).contains("solver: Unsupported"));
}

#[test]
fn solve_path_accepts_a_line_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let two = write(tmp.path(), "classify.py", TWO_BRANCH);
    let trace = write(tmp.path(), "trace.txt", "1\n2\n4\n");
    let o = pathforge(&["solve-path", s(&two), "--trace", s(&trace), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("input: x="));
}

#[test]
fn failure_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let two = write(tmp.path(), "classify.py", TWO_BRANCH);
    let out = tmp.path().join("out");

    let o = pathforge(&["solve-path", s(&two), "--path", "0", "--solver-cmd", "/no/such/solver", "--out", s(&out)]);
    assert_eq!(code(&o), 69);

    assert_eq!(code(&pathforge(&["solve-path", s(&two)])), 64);
    assert_eq!(code(&pathforge(&["paths", s(&two), "--bogus"])), 64);
    assert_eq!(code(&pathforge(&["translate", s(&two), "--path", "9"])), 64);

    let bad = write(tmp.path(), "report.json", "{\"records\": 3}");
    assert_eq!(code(&pathforge(&["report", s(&bad)])), 65);

    let broken = write(tmp.path(), "broken.py", "def f(x: int) -> int:\n    return (x\n");
    assert_eq!(code(&pathforge(&["parse", s(&broken)])), 65);
}

#[test]
fn report_renders_table_row() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "r.json", &table_report(2).to_json());
    let o = pathforge(&["report", s(&p)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("99 (89.2%) 97 (87.4%) 70 (63.1%)"), "{}", stdout(&o));

    let empty = RunReport::new("off".into(), 2, Vec::new(), Vec::new());
    let p = write(tmp.path(), "empty.json", &empty.to_json());
    let o = pathforge(&["report", s(&p)]);
    assert!(stdout(&o).contains("0 (0.0%) 0 (0.0%) 0 (0.0%)"), "{}", stdout(&o));
}

#[test]
fn report_grid_over_k() {
    let tmp = tempfile::tempdir().unwrap();
    let files: Vec<PathBuf> = [3, 1, 5, 2, 4]
        .into_iter()
        .map(|k| write(tmp.path(), &format!("k{k}.json"), &table_report(k).to_json()))
        .collect();
    let mut args = vec!["report"];
    args.extend(files.iter().map(|p| s(p)));
    let o = pathforge(&args);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    for (k, line) in (1..=5).zip(&lines[1..]) {
        assert_eq!(*line, format!("{k}\t99 (89.2%)\t97 (87.4%)\t70 (63.1%)"));
    }
}

#[test]
fn empty_corpus_gives_empty_report() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    let r = bench(&corpus, &tmp.path().join("out"), &[]);
    assert!(r.records.is_empty());
    assert_eq!(r.aggregates.paths, 0);
}

#[test]
fn out_of_subset_program_is_isolated() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    copy_corpus(&corpus);
    let base = bench(&corpus, &tmp.path().join("base"), &[]);

    fs::copy(manifest_dir().join("tests/fixtures/str_convert.py"), corpus.join("str_convert.py")).unwrap();
    fs::write(corpus.join("str_convert.inputs"), "5\n12345\n").unwrap();
    let mixed = bench(&corpus, &tmp.path().join("mixed"), &[]);

    let (odd, rest): (Vec<_>, Vec<_>) = mixed.records.iter().cloned().partition(|r| r.file == "str_convert.py");
    assert!(!odd.is_empty());
    assert!(odd.iter().all(|r| r.status == SolveStatus::Unsupported));
    let rest = RunReport::new(mixed.bridge.clone(), mixed.templates_k, rest, Vec::new());
    assert_eq!(verdicts(&rest), verdicts(&base));
}

#[test]
fn bench_is_deterministic_and_monotone() {
    let tmp = tempfile::tempdir().unwrap();
    let one = bench(&corpus_dir(), &tmp.path().join("one"), &["--all-paths", "--keep-smt"]);
    let two = bench(&corpus_dir(), &tmp.path().join("two"), &["--all-paths", "--jobs", "1"]);
    assert_eq!(verdicts(&one), verdicts(&two));
    assert_eq!(one.aggregates.counts(), two.aggregates.counts());
    assert!(one.consistent());

    for r in &one.records {
        if r.path_correct() {
            assert!(r.execution_pass(), "{r:?}");
        }
        if r.execution_pass() {
            assert!(r.status == SolveStatus::Sat && r.input.is_some(), "{r:?}");
        }
        assert_eq!(r.artifact.is_some(), r.status == SolveStatus::Sat, "{r:?}");
        if let Some(artifact) = &r.artifact {
            assert!(tmp.path().join("one").join(artifact).is_file(), "{artifact}");
        }
    }
}

#[test]
fn config_file_with_flag_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let two = write(tmp.path(), "narrow.py", NARROW);
    let cfg = write(tmp.path(), "pathforge.toml", "[bounds]\nmax_paths = 1\n\n[run]\njobs = 1\n");
    let listed = |o: &Output| stdout(o).lines().filter(|l| l.starts_with("path ")).count();

    let o = pathforge(&["paths", s(&two), "--config", s(&cfg)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(listed(&o), 1);

    let o = pathforge(&["paths", s(&two), "--config", s(&cfg), "--max-paths", "2"]);
    assert_eq!(listed(&o), 2);

    let o = pathforge(&["paths", s(&two)]);
    assert_eq!(listed(&o), 3);

    let bad = write(tmp.path(), "bad.toml", "[bounds]\nmax_stepz = 3\n");
    assert_eq!(code(&pathforge(&["paths", s(&two), "--config", s(&bad)])), 64);
}

#[test]
fn run_prints_result_and_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let two = write(tmp.path(), "classify.py", TWO_BRANCH);
    let o = pathforge(&["run", s(&two), "--args", "-7"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("0"), "{text}");
    assert!(text.contains("x > 3 ->not-taken"), "{text}");
}

#[test]
fn replay_bridge_from_the_command_line() {
    let tmp = tempfile::tempdir().unwrap();
    let alias = write(tmp.path(), "alias.py", ALIAS_APPEND);
    let (f, _) = function(ALIAS_APPEND);
    let id = paths(&f)
        .iter()
        .position(|p| p.render().contains("len(nums) > 2 ->taken"))
        .unwrap();
    let out = tmp.path().join("out");
    let fixtures = fixture_dir();
    let id = id.to_string();
    let args = ["solve-path", s(&alias), "--path", &id, "--out", s(&out)];
    let o = pathforge(&args);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
    let mut with_bridge = args.to_vec();
    with_bridge.extend(["--bridge", "replay", "--fixtures", s(&fixtures)]);
    let o = pathforge(&with_bridge);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("translation: bridge"));
}
