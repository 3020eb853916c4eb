//! Acceptance suite. Runs outside libtest so every criterion prints one
//! PASS/FAIL line; the process exits non-zero when any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;

use pathforge::bridge::{Bridge, BridgeOutcome, TemplateStore};
use pathforge::cfg::{build_cfg, chunk_path, enumerate_paths, Bounds, ChunkStrategy, ExecutionPath, StepKind};
use pathforge::frontend::{parse_unit, FunctionDef};
use pathforge::harness::bench::corpus_files;
use pathforge::harness::{bench, load_program, run_path, FunctionCtx, HarnessConfig, SolveStatus, TranslationSource};
use pathforge::interp::{brute_force_all, run, ConcreteValue, Domain, Limits, OracleResult, Outcome, PathVerdict};
use pathforge::smt::{
    emit_smtlib, parse_model, solve, ArrayVal, Model, Origin, SolverVerdict, Term, Value,
};
use pathforge::testcase::{decode_model, TestInput};
use pathforge::translator::{init_state, parse_ssa_name, translate_path, TranslationOutcome};
use pathforge::typing::{infer_types, TypeEnv};

use common::*;

type Verdict = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Every function of every corpus program with its types.
fn corpus_functions() -> Vec<(String, FunctionDef, TypeEnv)> {
    let mut out = Vec::new();
    for path in corpus_files(&corpus_dir()).expect("corpus readable") {
        let p = load_program(&path).expect("corpus program loads");
        for f in p.unit.functions {
            let env = infer_types(&f).expect("corpus program types");
            out.push((p.file.clone(), f, env));
        }
    }
    out
}

fn corpus_paths(f: &FunctionDef) -> Vec<ExecutionPath> {
    enumerate_paths(&build_cfg(f), &Bounds::default())
}

// ---------------------------------------------------------------------------
// 1

const LIST_OPS: [(&str, &str); 7] = [
    ("list parameter", ": list["),
    ("len", "len("),
    ("indexing", "]"),
    ("element assignment", "] = "),
    ("append", ".append("),
    ("pop", ".pop("),
    ("negative index", "[-"),
];

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let files = corpus_files(&corpus_dir()).map_err(|e| e.to_string())?;
    check(files.len() >= 20, || format!("only {} corpus programs", files.len()))?;
    let mut sources = String::new();
    for path in &files {
        let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
        let lines = text.lines().count();
        check(lines <= 25, || format!("{} has {lines} lines", path.display()))?;
        parse_unit(&text, &path.display().to_string()).map_err(|e| format!("{}: {e}", path.display()))?;
        sources.push_str(&text);
    }
    for (name, needle) in LIST_OPS {
        check(sources.contains(needle), || format!("corpus never uses {name}"))?;
    }

    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = HarnessConfig {
        out_dir: out.path().join("examples"),
        ..HarnessConfig::default()
    };
    check(cfg.bounds.max_steps == 20 && cfg.bounds.max_loop_iterations == 3, || {
        "default bounds drifted".into()
    })?;
    let report = bench(&corpus_dir(), &cfg, None).map_err(|e| e.to_string())?;
    check(report.failures.is_empty(), || format!("program failures: {:?}", report.failures))?;
    for r in &report.records {
        check(r.status == SolveStatus::Sat && r.path_correct(), || {
            format!("{}::{} p{}: {:?} {:?} {:?}", r.file, r.function, r.path_id, r.status, r.test_verdict, r.detail)
        })?;
    }
    let examples = report.records.len();

    cfg.all_paths = true;
    cfg.out_dir = out.path().join("all");
    let all = bench(&corpus_dir(), &cfg, None).map_err(|e| e.to_string())?;
    let a = all.aggregates;
    check(a.unknown == 0 && a.unsupported == 0 && a.errors == 0, || format!("all-paths aggregates {a:?}"))?;
    check(a.path_correct == a.sat && a.execution_pass == a.sat, || {
        format!("all-paths: {} sat but {} path correct, {} execution pass", a.sat, a.path_correct, a.execution_pass)
    })?;
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} programs, {examples}/{examples} example paths path-correct; all paths: {} sat all path-correct, {} unsat; {:.1}s",
        files.len(),
        a.sat,
        a.unsat,
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// 2

fn in_domain(v: &ConcreteValue, d: &Domain) -> bool {
    match v {
        ConcreteValue::Int(i) => (d.int_range.0..=d.int_range.1).contains(i),
        ConcreteValue::Float(x) => d.float_grid.contains(x),
        ConcreteValue::Bool(_) => true,
        ConcreteValue::List(items) => {
            items.len() <= d.list_len_max
                && items.iter().all(|e| match e {
                    ConcreteValue::Int(i) => (d.elem_range.0..=d.elem_range.1).contains(i),
                    other => in_domain(other, d),
                })
        }
    }
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let domain = Domain::default();
    let solver = solver();
    let (mut agree, mut inconclusive, mut mismatches) = (0, 0, Vec::new());
    for (file, f, env) in corpus_functions() {
        let paths = corpus_paths(&f);
        let oracle = brute_force_all(&f, &env, &paths, &domain);
        for (i, (p, o)) in paths.iter().zip(&oracle).enumerate() {
            let script = match translate_path(p, &env) {
                TranslationOutcome::Translated { script, .. } => script,
                TranslationOutcome::Unsupported(u) => return Err(format!("{file}::{} p{i}: {u}", f.name)),
            };
            let run = solve(&script, &solver);
            let tag = format!("{file}::{} p{i}", f.name);
            match (&run.verdict, o) {
                (SolverVerdict::Sat(_), OracleResult::FoundInput(_)) => agree += 1,
                (SolverVerdict::Unsat, OracleResult::ExhaustedNoInput) => agree += 1,
                (SolverVerdict::Unsat, OracleResult::FoundInput(t)) => {
                    mismatches.push(format!("{tag}: unsat but oracle found {}", t.render()))
                }
                (SolverVerdict::Sat(m), OracleResult::ExhaustedNoInput) => {
                    let input = decode_model(m, &env, &script).map_err(|e| format!("{tag}: {e}"))?;
                    if input.args.iter().all(|(_, v)| in_domain(v, &domain)) {
                        mismatches.push(format!("{tag}: sat with in-domain model {} the oracle missed", input.render()));
                    } else {
                        inconclusive += 1;
                    }
                }
                (other, _) => mismatches.push(format!("{tag}: solver {}", other.label())),
            }
        }
    }
    check(mismatches.is_empty(), || mismatches.join("; "))?;
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(600), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{agree} conclusive paths agree, 0 mismatches, {inconclusive} inconclusive (model outside domain); {:.1}s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// 3

const LIST_ROWS: [(&str, &str, &str); 7] = [
    (
        "list_initialize",
        "def f(n1: list[int]) -> int:\n    return 0\n",
        "",
    ),
    (
        "list_length",
        "def f(n: list[int]) -> int:\n    if len(n) > 5:\n        return 1\n    return 0\n",
        "len(n) > 5 ->taken",
    ),
    (
        "list_indexing",
        "def f(lst: list[int], i: int, j: int) -> int:\n    if lst[i] == j:\n        return 1\n    return 0\n",
        "lst[i] == j ->taken",
    ),
    (
        "list_assignment",
        "def f(lst: list[int], i: int) -> int:\n    lst[i] = 2\n    return 0\n",
        "",
    ),
    (
        "list_append",
        "def f(n: list[int], x: int) -> int:\n    n.append(x)\n    return 0\n",
        "",
    ),
    (
        "list_pop",
        "def f(n: list[int]) -> int:\n    n.pop()\n    return 0\n",
        "",
    ),
    (
        "list_negative_index",
        "def f(lst: list[int], z: int) -> int:\n    if lst[-2] == z:\n        return 1\n    return 0\n",
        "lst[-2] == z ->taken",
    ),
];

fn criterion_3() -> Verdict {
    for (name, src, marker) in LIST_ROWS {
        let (f, env) = function(src);
        let path = paths(&f)
            .into_iter()
            .find(|p| p.render().contains(marker))
            .ok_or_else(|| format!("{name}: no path with {marker:?}"))?;
        let script = translate_path(&path, &env)
            .script()
            .cloned()
            .ok_or_else(|| format!("{name}: untranslatable"))?;
        let got = emit_smtlib(&script, "ALL");
        let again = emit_smtlib(&translate_path(&path, &env).script().cloned().unwrap(), "ALL");
        check(got == again, || format!("{name}: emission not stable"))?;
        let golden = fs::read_to_string(manifest_dir().join(format!("tests/golden/{name}.smt2")))
            .map_err(|e| format!("{name}: {e}"))?;
        check(got == golden, || format!("{name}: emitted\n{got}\nexpected\n{golden}"))?;
    }
    Ok("7/7 golden encodings byte-identical".into())
}

// ---------------------------------------------------------------------------
// 4

fn floor_div(a: i64, b: i64) -> i64 {
    (a as f64 / b as f64).floor() as i64
}

fn criterion_4() -> Verdict {
    let (f, env) = function("def f(a: int, b: int) -> int:\n    q = a // b\n    return q\n");
    let path = paths(&f).remove(0);
    let base = translate_path(&path, &env).script().cloned().ok_or("untranslatable")?;
    let solver = solver();
    let (mut ok, mut total) = (0, 0);
    for a in -8..=8i64 {
        for b in (-4..=4i64).filter(|b| *b != 0) {
            total += 1;
            let mut script = base.clone();
            let o = Origin { step: 0, synthetic: true };
            script.assert(Term::eq(Term::sym("_a_0"), Term::Int(a)), o);
            script.assert(Term::eq(Term::sym("_b_0"), Term::Int(b)), o);
            let SolverVerdict::Sat(m) = solve(&script, &solver).verdict else {
                return Err(format!("{a} // {b}: not sat"));
            };
            let q = m.bindings.get("_q_0").and_then(Value::as_i64);
            let interp = match run(&f, &[ConcreteValue::Int(a), ConcreteValue::Int(b)], Limits::default()).outcome {
                Outcome::Returned(Some(ConcreteValue::Int(v))) => Some(v),
                _ => None,
            };
            let expect = floor_div(a, b);
            check(q == Some(expect) && interp == Some(expect), || {
                format!("{a} // {b}: solver {q:?}, interpreter {interp:?}, floor {expect}")
            })?;
            ok += 1;
        }
    }
    Ok(format!("{ok}/{total} pairs agree"))
}

// ---------------------------------------------------------------------------
// 5

fn list_model(stores: &[(i64, i64)], len: i64) -> Model {
    let mut arr = ArrayVal::constant(Value::Int(BigInt::from(0)));
    for (i, v) in stores {
        arr.store(BigInt::from(*i), Value::Int(BigInt::from(*v)));
    }
    let mut bindings = BTreeMap::new();
    bindings.insert("_xs_0".to_string(), Value::Array(arr));
    bindings.insert("_xs_0_len".to_string(), Value::Int(BigInt::from(len)));
    Model { bindings }
}

fn criterion_5() -> Verdict {
    let (f, env) = function("def f(xs: list[int]) -> int:\n    return 0\n");
    let (_, script) = init_state(&env, &f);
    let decode = |m: &Model| decode_model(m, &env, &script).map_err(|e| e.to_string());
    let list = |v: &[i64]| TestInput {
        args: vec![("xs".into(), ConcreteValue::List(v.iter().map(|i| ConcreteValue::Int(*i)).collect()))],
    };
    let got = decode(&list_model(&[(2, 3)], 4))?;
    check(got == list(&[0, 0, 3, 0]), || format!("length 4 decoded to {}", got.render()))?;
    let got = decode(&list_model(&[(2, 3)], 0))?;
    check(got == list(&[]), || format!("length 0 decoded to {}", got.render()))?;
    let got = decode(&list_model(&[(2, 3), (4, 9), (-1, 7)], 4))?;
    check(got == list(&[0, 0, 3, 0]), || format!("outside stores leaked: {}", got.render()))?;

    let text = "(\n  (define-fun _xs_0_len () Int 4)\n  (define-fun _xs_0 () (Array Int Int) (store ((as const (Array Int Int)) 0) 2 3))\n)";
    let m = parse_model(text, &script.decls).map_err(|e| e.to_string())?;
    let got = decode(&m)?;
    check(got == list(&[0, 0, 3, 0]), || format!("parsed model decoded to {}", got.render()))?;
    Ok("[0, 0, 3, 0], [] and out-of-window stores decode exactly".into())
}

// ---------------------------------------------------------------------------
// 6

fn criterion_6() -> Verdict {
    let (mut scripts, mut asserts, mut violations) = (0, 0, Vec::new());
    for (file, f, env) in corpus_functions() {
        for (i, p) in corpus_paths(&f).iter().enumerate() {
            let TranslationOutcome::Translated { script, ssa } = translate_path(p, &env) else {
                return Err(format!("{file}::{} p{i} untranslatable", f.name));
            };
            scripts += 1;
            for (t, o) in script.asserts.iter().zip(&script.origin) {
                asserts += 1;
                let index = &ssa[o.step];
                for s in t.symbols() {
                    let Some((var, k)) = parse_ssa_name(s) else { continue };
                    match index.get(var) {
                        Some(cur) if k <= *cur => {}
                        cur => violations.push(format!(
                            "{file}::{} p{i} step {}: {s} with index {cur:?}",
                            f.name, o.step
                        )),
                    }
                }
            }
        }
    }
    check(asserts > 0, || "no assertions scanned".into())?;
    check(violations.is_empty(), || violations.join("; "))?;
    Ok(format!("{asserts} assertions over {scripts} scripts, 0 forward references"))
}

// ---------------------------------------------------------------------------
// 7

fn replay_bridge() -> Bridge {
    Bridge::from_config(replay_config(), solver(), None)
        .expect("replay transport")
        .expect("bridge enabled")
}

fn path_with(f: &FunctionDef, needle: &str) -> Result<ExecutionPath, String> {
    paths(f)
        .into_iter()
        .find(|p| p.render().contains(needle))
        .ok_or_else(|| format!("no path with {needle:?}"))
}

fn chunk_at(p: &ExecutionPath, offset: usize) -> pathforge::cfg::PathChunk {
    chunk_path(p, ChunkStrategy::ByLine)
        .into_iter()
        .find(|c| c.offset == offset)
        .expect("line chunk at offset")
}

fn criterion_7() -> Verdict {
    let bridge = replay_bridge();
    let mut parts = Vec::new();

    // first-try acceptance, end to end
    let (f, env) = function(ALIAS_APPEND);
    let p = path_with(&f, "len(nums) > 2 ->taken")?;
    let (state, prior) = prefix_state(&env, &p, 2);
    match bridge.fragment_for(&chunk_at(&p, 2), &state.index, &prior).map_err(|e| e.to_string())? {
        BridgeOutcome::Fragment(fr) if fr.attempts == 1 => {}
        other => return Err(format!("first-try: {other:?}")),
    }
    let ctx = FunctionCtx { file: "alias_append.py", source: ALIAS_APPEND, f: &f, env: &env };
    let rec = run_path(ctx, &p, 0, &solver(), Some(&bridge)).record;
    check(
        rec.source == Some(TranslationSource::Bridge) && rec.status == SolveStatus::Sat && rec.path_correct(),
        || format!("first-try pipeline: {rec:?}"),
    )?;
    parts.push("accept@1");

    // refine then accept
    let (f, env) = function(ALIAS_WRITE);
    let p = path_with(&f, "nums[0] == 5 ->taken")?;
    let (state, prior) = prefix_state(&env, &p, 3);
    match bridge.fragment_for(&chunk_at(&p, 3), &state.index, &prior).map_err(|e| e.to_string())? {
        BridgeOutcome::Fragment(fr) if fr.attempts == 2 => {}
        other => return Err(format!("refine: {other:?}")),
    }
    let ctx = FunctionCtx { file: "alias_write.py", source: ALIAS_WRITE, f: &f, env: &env };
    let rec = run_path(ctx, &p, 0, &solver(), Some(&bridge)).record;
    check(
        rec.source == Some(TranslationSource::Bridge) && rec.path_correct(),
        || format!("refine pipeline: {rec:?}"),
    )?;
    parts.push("accept@2");

    // three rejected attempts end the loop
    let (f, env) = function(CLAMP);
    let p = paths(&f).remove(0);
    let (state, prior) = prefix_state(&env, &p, 1);
    let chunk = chunk_path(&p, ChunkStrategy::ByLine).remove(1);
    match bridge.fragment_for(&chunk, &state.index, &prior).map_err(|e| e.to_string())? {
        BridgeOutcome::BridgeFailed { attempts: 3, .. } => {}
        other => return Err(format!("bounded refine: {other:?}")),
    }
    parts.push("gave up after 3");

    // direct solving, replayed through the interpreter
    let (f, env) = function(TWO_BRANCH);
    let all = paths(&f);
    match bridge.solve_directly(TWO_BRANCH, &f, &env, &all[0]).map_err(|e| e.to_string())? {
        BridgeOutcome::FallbackInput { input, verdict: PathVerdict::PathCorrect } => {
            check(input.args == vec![("x".into(), ConcreteValue::Int(4))], || format!("fallback input {}", input.render()))?
        }
        other => return Err(format!("fallback: {other:?}")),
    }
    match bridge.solve_directly(TWO_BRANCH, &f, &env, &all[1]).map_err(|e| e.to_string())? {
        BridgeOutcome::BridgeFailed { attempts: 2, .. } => {}
        other => return Err(format!("bad fallback reply: {other:?}")),
    }
    let (f, env) = function(NARROW);
    let p = paths(&f)
        .into_iter()
        .find(|p| p.steps.get(2).and_then(|s| s.branch_taken) == Some(true))
        .ok_or("narrow path")?;
    match bridge.solve_directly(NARROW, &f, &env, &p).map_err(|e| e.to_string())? {
        BridgeOutcome::FallbackUnsat => {}
        other => return Err(format!("unsat claim: {other:?}")),
    }
    parts.push("fallback replayed");

    // retrieval
    let store = TemplateStore::shipped();
    let hits = store
        .templates
        .iter()
        .filter(|t| store.retrieve(&t.key_chunk, 1).first().map(|(h, _)| h.id.as_str()) == Some(t.id.as_str()))
        .count();
    check(hits == 14 && store.templates.len() == 14, || format!("self-recall {hits}/{}", store.templates.len()))?;
    let ranked = store.retrieve("7\texpression\ta[j] = a[j] + 1", 14);
    let score = |id: &str| ranked.iter().find(|(t, _)| t.id == id).map(|(_, s)| *s).unwrap_or(-1.0);
    let order: Vec<&str> = ranked.iter().take(2).map(|(t, _)| t.id.as_str()).collect();
    check(order == ["t14", "t04"], || format!("top hits {order:?}"))?;
    check((score("t14") - 7.0 / 160f64.sqrt()).abs() < 1e-9, || format!("t14 score {}", score("t14")))?;
    check((score("t04") - 6.0 / 140f64.sqrt()).abs() < 1e-9, || format!("t04 score {}", score("t04")))?;
    check((score("t05") - 1.0 / 140f64.sqrt()).abs() < 1e-9, || format!("t05 score {}", score("t05")))?;
    Ok(format!("{}; self-recall@1 {hits}/14", parts.join(", ")))
}

// ---------------------------------------------------------------------------
// 8

/// (file, condition line, branch value the oracle never reaches)
const DEAD_BRANCHES: [(&str, u32, bool); 10] = [
    ("threshold.py", 3, true),
    ("abs_diff.py", 3, true),
    ("running_sum.py", 5, true),
    ("stack_pop.py", 5, true),
    ("last_two.py", 4, false),
    ("digit_sum.py", 8, true),
    ("climb_stairs.py", 7, true),
    ("gcd.py", 8, true),
    ("remove_element.py", 4, true),
    ("plus_one.py", 9, true),
];

fn criterion_8() -> Verdict {
    let solver = solver();
    let domain = Domain::default();
    for (file, line, dead) in DEAD_BRANCHES {
        let program = load_program(&corpus_dir().join(file)).map_err(|e| e.to_string())?;
        let f = program.unit.functions[0].clone();
        let env = infer_types(&f).map_err(|e| e.to_string())?;
        let p = corpus_paths(&f)
            .into_iter()
            .find(|p| p.steps.iter().any(|s| s.line == line && s.kind == StepKind::Condition))
            .ok_or_else(|| format!("{file}: no condition at line {line}"))?;
        let at = p
            .steps
            .iter()
            .position(|s| s.line == line && s.kind == StepKind::Condition)
            .expect("found above");
        let with = |taken: bool| {
            let mut q = p.truncate(at + 1);
            q.steps[at].branch_taken = Some(taken);
            q.truncated = true;
            q
        };
        let targets = [with(true), with(false)];
        let oracle = brute_force_all(&f, &env, &targets, &domain);
        check(oracle[0].found() != oracle[1].found() && !oracle[usize::from(!dead)].found(), || {
            format!("{file}:{line}: oracle found true={} false={}", oracle[0].found(), oracle[1].found())
        })?;
        for (q, taken) in targets.iter().zip([true, false]) {
            let script = translate_path(q, &env)
                .script()
                .cloned()
                .ok_or_else(|| format!("{file}:{line}: untranslatable"))?;
            let v = solve(&script, &solver).verdict;
            let want_sat = taken != dead;
            check(v.is_sat() == want_sat && (want_sat || v == SolverVerdict::Unsat), || {
                format!("{file}:{line} taken={taken}: solver {}", v.label())
            })?;
        }
    }
    Ok("10/10 flips change Sat to Unsat".into())
}

// ---------------------------------------------------------------------------

fn main() {
    if !pathforge::smt::solver_available(&solver()) {
        println!("FAIL all criteria: solver {:?} not available", solver().command);
        std::process::exit(1);
    }
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("end-to-end rules pipeline", criterion_1),
        ("oracle equivalence", criterion_2),
        ("list encoding conformance", criterion_3),
        ("floor-division differential", criterion_4),
        ("model decoding", criterion_5),
        ("SSA integrity scan", criterion_6),
        ("bridge replay suite", criterion_7),
        ("negation soundness", criterion_8),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", n + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
