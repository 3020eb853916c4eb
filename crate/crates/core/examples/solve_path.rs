//! Translates one path, solves it and turns the model into a test.
//! Needs `z3` on PATH, or a solver command in PATHFORGE_SOLVER.

use pathforge::cfg::{build_cfg, enumerate_paths, Bounds};
use pathforge::frontend::parse_unit;
use pathforge::interp::path_verdict;
use pathforge::smt::{solve, SolverConfig, SolverVerdict};
use pathforge::testcase::{decode_model, emit_artifact};
use pathforge::translator::translate_path;
use pathforge::typing::infer_types;

fn main() {
    let src = include_str!("../corpus/last_two.py");
    let f = parse_unit(src, "last_two.py").unwrap().functions.remove(0);
    let env = infer_types(&f).unwrap();
    let solver = SolverConfig::default();
    for (id, path) in enumerate_paths(&build_cfg(&f), &Bounds::default()).iter().enumerate() {
        let script = translate_path(path, &env).script().cloned().unwrap();
        match solve(&script, &solver).verdict {
            SolverVerdict::Sat(model) => {
                let input = decode_model(&model, &env, &script).unwrap();
                let verdict = path_verdict(&f, &input, path);
                let art = emit_artifact(&input, &f, "last_two.py", id, Some(verdict.label()));
                println!("path {id}: {}  [{}]", art.snippet(), verdict.label());
            }
            other => println!("path {id}: {}", other.label()),
        }
    }
}
