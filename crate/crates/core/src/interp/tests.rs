use super::*;
use crate::cfg::{enumerate_paths, Bounds};
use crate::frontend::parse_unit;
use crate::typing::infer_types;

fn func(src: &str) -> FunctionDef {
    parse_unit(src, "t.py").unwrap().functions.remove(0)
}

fn int(i: i64) -> ConcreteValue {
    ConcreteValue::Int(i)
}

fn list(v: &[i64]) -> ConcreteValue {
    ConcreteValue::List(v.iter().map(|i| ConcreteValue::Int(*i)).collect())
}

#[test]
fn returns_value_with_two_step_trace() {
    let f = func("def f(x: int) -> int:\n    return x + 1\n");
    let r = run(&f, &[int(41)], Limits::default());
    assert_eq!(r.outcome, Outcome::Returned(Some(int(42))));
    assert_eq!(r.trace.steps.len(), 2);
    assert!(!r.trace.truncated);
}

#[test]
fn negative_index_wraps() {
    let f = func("def f(lst: list[int]) -> int:\n    return lst[-2]\n");
    assert_eq!(run(&f, &[list(&[0, 0])], Limits::default()).outcome, Outcome::Returned(Some(int(0))));
    let r = run(&f, &[list(&[5])], Limits::default());
    assert_eq!(r.raised(), Some(RaiseKind::IndexError));
}

#[test]
fn floor_division_and_modulo_floor() {
    let f = func("def f(a: int, b: int) -> int:\n    return a // b\n");
    let g = func("def g(a: int, b: int) -> int:\n    return a % b\n");
    for a in -8i64..=8 {
        for b in (-4i64..=4).filter(|b| *b != 0) {
            let q = (a as f64 / b as f64).floor() as i64;
            assert_eq!(run(&f, &[int(a), int(b)], Limits::default()).outcome, Outcome::Returned(Some(int(q))));
            assert_eq!(
                run(&g, &[int(a), int(b)], Limits::default()).outcome,
                Outcome::Returned(Some(int(a - b * q)))
            );
        }
    }
    assert_eq!(
        run(&f, &[int(1), int(0)], Limits::default()).raised(),
        Some(RaiseKind::ZeroDivisionError)
    );
}

#[test]
fn short_circuit_skips_right_operand() {
    let f = func("def f(n: list[int]) -> bool:\n    if len(n) > 0 and n[0] > 1:\n        return True\n    return False\n");
    let r = run(&f, &[list(&[])], Limits::default());
    assert_eq!(r.outcome, Outcome::Returned(Some(ConcreteValue::Bool(false))));
}

#[test]
fn list_mutation() {
    let f = func("def f(n: list[int]) -> int:\n    n.append(4)\n    x = n.pop()\n    n.pop()\n    n[0] = x\n    return n[0] + len(n)\n");
    let r = run(&f, &[list(&[1, 2])], Limits::default());
    assert_eq!(r.outcome, Outcome::Returned(Some(int(5))));
    let r = run(&f, &[list(&[])], Limits::default());
    assert_eq!(r.raised(), Some(RaiseKind::IndexError));
}

#[test]
fn step_limit() {
    let f = func("def f(x: int) -> int:\n    while x > 0:\n        x = x + 1\n    return x\n");
    let r = run(&f, &[int(1)], Limits { max_steps: 50 });
    assert_eq!(r.raised(), Some(RaiseKind::StepLimit));
    assert_eq!(r.steps_executed, 50);
}

#[test]
fn traces_match_enumerated_paths() {
    let src = "def f(nums: list[int]) -> int:\n    s = 0\n    for x in nums:\n        if x > 0:\n            s += x\n        else:\n            break\n    return s\n";
    let f = func(src);
    let cfg = build_cfg(&f);
    let paths = enumerate_paths(&cfg, &Bounds::default());
    for input in [list(&[]), list(&[1]), list(&[1, -1]), list(&[2, 3])] {
        let r = run_cfg(&cfg, std::slice::from_ref(&input), Limits::default());
        let hits = paths.iter().filter(|p| follows(&r, p)).count();
        assert_eq!(hits, 1, "{input}: {}", r.trace.render());
    }
}

#[test]
fn verdicts() {
    let f = func("def f(x: int) -> int:\n    if x > 3:\n        return 1\n    return 0\n");
    let paths = enumerate_paths(&build_cfg(&f), &Bounds::default());
    let taken = paths
        .iter()
        .find(|p| p.steps[1].branch_taken == Some(true))
        .unwrap();
    let input = |x| TestInput {
        args: vec![("x".into(), int(x))],
    };
    assert_eq!(path_verdict(&f, &input(4), taken), PathVerdict::PathCorrect);
    assert_eq!(path_verdict(&f, &input(0), taken), PathVerdict::ExecutionPassOnly);
    let g = func("def g(x: int) -> int:\n    return 1 // x\n");
    let gp = enumerate_paths(&build_cfg(&g), &Bounds::default());
    assert_eq!(
        path_verdict(&g, &input(0), &gp[0]),
        PathVerdict::Failed("ZeroDivisionError".into())
    );
}

#[test]
fn brute_force_finds_first_input() {
    let f = func("def f(x: int) -> int:\n    if x > 3:\n        return 1\n    return 0\n");
    let env = infer_types(&f).unwrap();
    let paths = enumerate_paths(&build_cfg(&f), &Bounds::default());
    let taken = paths
        .iter()
        .find(|p| p.steps[1].branch_taken == Some(true))
        .unwrap();
    let OracleResult::FoundInput(i) = brute_force(&f, &env, taken, &Domain::default()) else {
        panic!()
    };
    assert_eq!(i.args[0].1, int(4));
}

#[test]
fn brute_force_exhausts_infeasible_and_out_of_domain() {
    let f = func("def f(x: int) -> int:\n    if x > 3:\n        if x < 2:\n            return 1\n    return 0\n");
    let env = infer_types(&f).unwrap();
    let paths = enumerate_paths(&build_cfg(&f), &Bounds::default());
    let inner = paths
        .iter()
        .find(|p| p.steps.len() > 2 && p.steps[2].branch_taken == Some(true))
        .unwrap();
    assert_eq!(brute_force(&f, &env, inner, &Domain::default()), OracleResult::ExhaustedNoInput);

    let g = func("def g(n: list[int]) -> int:\n    if len(n) > 5:\n        return 1\n    return 0\n");
    let env = infer_types(&g).unwrap();
    let paths = enumerate_paths(&build_cfg(&g), &Bounds::default());
    let results = brute_force_all(&g, &env, &paths, &Domain::default());
    assert_eq!(results.iter().filter(|r| r.found()).count(), 1);
}

#[test]
fn list_candidates_are_ordered_by_length() {
    let d = Domain::default();
    let c = d.candidates(crate::typing::SubsetType::ListOf(crate::typing::ScalarType::Int));
    assert_eq!(c.len(), 1 + 7 + 49 + 343 + 2401);
    assert_eq!(c[0], list(&[]));
    assert_eq!(c[1], list(&[-3]));
    assert_eq!(c[8], list(&[-3, -3]));
}
