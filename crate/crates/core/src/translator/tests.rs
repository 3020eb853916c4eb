use super::*;
use crate::cfg::{build_cfg, enumerate_paths, Bounds};
use crate::frontend::{parse_unit, parse_unit_lenient};
use crate::smt::emit_smtlib;
use crate::typing::infer_types;

fn paths_of(src: &str) -> (Vec<ExecutionPath>, TypeEnv) {
    let unit = parse_unit(src, "t.py").unwrap();
    let f = &unit.functions[0];
    let env = infer_types(f).unwrap();
    (enumerate_paths(&build_cfg(f), &Bounds::default()), env)
}

fn asserts(src: &str, path: usize) -> Vec<String> {
    let (paths, env) = paths_of(src);
    let out = translate_path(&paths[path], &env);
    out.script()
        .unwrap_or_else(|| panic!("{out:?}"))
        .asserts
        .iter()
        .map(|a| a.to_string())
        .collect()
}

#[test]
fn list_parameter_initialization() {
    let (paths, env) = paths_of("def f(n1: list[int]) -> int:\n    return 0\n");
    let TranslationOutcome::Translated { script, .. } = translate_path(&paths[0], &env) else {
        panic!()
    };
    let text = emit_smtlib(&script, "ALL");
    assert!(text.contains("(declare-const _n1_0 (Array Int Int))"));
    assert!(text.contains("(declare-const _n1_0_len Int)"));
    assert_eq!(script.asserts.len(), 1);
    assert_eq!(script.asserts[0].to_string(), "(>= _n1_0_len 0)");
    assert!(script.origin[0].synthetic);
}

#[test]
fn scalar_parameter_has_no_asserts() {
    let (paths, env) = paths_of("def f(x: int) -> int:\n    return x\n");
    let script = translate_path(&paths[0], &env).script().unwrap().clone();
    assert_eq!(script.decls.len(), 1);
    assert!(script.asserts.is_empty());
}

#[test]
fn list_operations() {
    let a = asserts(
        "def f(n: list[int], x: int) -> int:\n    n.append(x)\n    n.pop()\n    n[0] = 2\n    return n[-1]\n",
        0,
    );
    assert_eq!(
        a,
        vec![
            "(>= _n_0_len 0)",
            "(= _n_1 (store _n_0 _n_0_len _x_0))",
            "(= _n_1_len (+ _n_0_len 1))",
            "(> _n_1_len 0)",
            "(= _n_2 _n_1)",
            "(= _n_2_len (- _n_1_len 1))",
            "(< 0 _n_2_len)",
            "(= _n_3 (store _n_2 0 2))",
            "(= _n_3_len _n_2_len)",
            "(>= (- 1) (- _n_3_len))",
        ]
    );
}

#[test]
fn branch_negation() {
    let src = "def f(x: int) -> int:\n    if x > 3:\n        return 1\n    return 0\n";
    let (paths, env) = paths_of(src);
    let mut texts: Vec<String> = paths
        .iter()
        .map(|p| translate_path(p, &env).script().unwrap().asserts[0].to_string())
        .collect();
    texts.sort();
    assert_eq!(texts, vec!["(> _x_0 3)", "(not (> _x_0 3))"]);
}

#[test]
fn reassignment_numbering() {
    let (paths, env) = paths_of("def f(x: int, y: int) -> int:\n    x = x + y\n    x = x * 2\n    z = x\n    return z\n");
    let mut state = SsaEnv::new(env.clone());
    let mut script = SmtScript::new("f");
    for (i, s) in paths[0].steps.iter().enumerate() {
        translate_step(&mut state, &mut script, i, s).unwrap();
    }
    let name = |v: &str| match current_symbol(&state, v).unwrap() {
        VarSymbols::Scalar(s) => s.name,
        _ => panic!(),
    };
    assert_eq!(name("x"), "_x_2");
    assert_eq!(name("y"), "_y_0");
    assert_eq!(name("z"), "_z_0");
    assert!(current_symbol(&state, "w").is_err());
    let a: Vec<String> = script.asserts.iter().map(|t| t.to_string()).collect();
    assert_eq!(a, vec!["(= _x_1 (+ _x_0 _y_0))", "(= _x_2 (* _x_1 2))", "(= _z_0 _x_2)"]);
}

#[test]
fn floor_division_is_guarded() {
    let a = asserts("def f(a: int, b: int) -> int:\n    q = a // b\n    return q\n", 0);
    assert_eq!(a[0], "(not (= _b_0 0))");
    assert!(a[1].starts_with("(or (and (> _b_0 0)"));
    assert_eq!(a[2], "(= _q_0 fdiv!0)");
}

#[test]
fn short_circuit_guards_side_constraints() {
    let a = asserts(
        "def f(nums: list[int], i: int) -> bool:\n    if i < 2 or nums[i - 2] != 0:\n        return True\n    return False\n",
        0,
    );
    assert!(
        a.contains(&"(=> (not (< _i_0 2)) (and (<= 0 (- _i_0 2)) (< (- _i_0 2) _nums_0_len)))".to_string()),
        "{a:?}"
    );
}

#[test]
fn mixed_arithmetic_converts_ints() {
    let a = asserts("def f(x: int, y: float) -> float:\n    z = x + y\n    return z\n", 0);
    assert_eq!(a, vec!["(= _z_0 (+ (to_real _x_0) _y_0))"]);
}

#[test]
fn list_literal_defines_elements_and_length() {
    let a = asserts("def f() -> int:\n    dp = [0, 1]\n    return dp[1]\n", 0);
    assert_eq!(
        a,
        vec![
            "(= (select _dp_0 0) 0)",
            "(= (select _dp_0 1) 1)",
            "(= _dp_0_len 2)",
            "(< 1 _dp_0_len)",
        ]
    );
}

#[test]
fn str_conversion_is_unsupported() {
    let unit = parse_unit_lenient("def f(x: int) -> int:\n    y = str(x)\n    return x\n", "t.py").unwrap();
    let f = &unit.functions[0];
    let mut env = TypeEnv::default();
    env.params.push(("x".into(), SubsetType::Int));
    env.vars.insert("x".into(), SubsetType::Int);
    env.vars.insert("y".into(), SubsetType::Int);
    let paths = enumerate_paths(&build_cfg(f), &Bounds::default());
    let TranslationOutcome::Unsupported(u) = translate_path(&paths[0], &env) else {
        panic!()
    };
    assert_eq!(u.construct, "str conversion");
    assert_eq!(u.step, 1);
}

#[test]
fn aliased_mutation_is_unsupported() {
    let (paths, env) = paths_of("def f(a: list[int]) -> int:\n    b = a\n    b.append(1)\n    return 0\n");
    assert!(matches!(
        translate_path(&paths[0], &env),
        TranslationOutcome::Unsupported(Unsupported { step: 2, .. })
    ));
}

#[test]
fn ssa_names_round_trip() {
    assert_eq!(parse_ssa_name("_x_2"), Some(("x", 2)));
    assert_eq!(parse_ssa_name("_n1_0_len"), Some(("n1", 0)));
    assert_eq!(parse_ssa_name("__idx_num_3"), Some(("_idx_num", 3)));
    assert_eq!(parse_ssa_name("fdiv!0"), None);
}

#[test]
fn deterministic() {
    let src = "def f(nums: list[int]) -> int:\n    s = 0\n    for x in nums:\n        if x % 2 == 0:\n            s += x // 2\n    return s\n";
    let (paths, env) = paths_of(src);
    for p in &paths {
        let a = emit_smtlib(translate_path(p, &env).script().unwrap(), "ALL");
        let b = emit_smtlib(translate_path(p, &env).script().unwrap(), "ALL");
        assert_eq!(a, b);
    }
}
