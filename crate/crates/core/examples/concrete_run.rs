//! Concrete execution with a step trace, and the brute-force oracle.

use pathforge::cfg::{build_cfg, enumerate_paths, Bounds};
use pathforge::frontend::parse_unit;
use pathforge::interp::{brute_force, parse_args, run, Domain, Limits, OracleResult};
use pathforge::typing::infer_types;

fn main() {
    let src = include_str!("../corpus/running_sum.py");
    let f = parse_unit(src, "running_sum.py").unwrap().functions.remove(0);
    let args = parse_args("[3, -1, 2]").unwrap();
    let r = run(&f, &args, Limits::default());
    println!("{:?}", r.outcome);
    print!("{}", r.trace.render());

    let env = infer_types(&f).unwrap();
    for (i, p) in enumerate_paths(&build_cfg(&f), &Bounds::default()).iter().take(4).enumerate() {
        match brute_force(&f, &env, p, &Domain::default()) {
            OracleResult::FoundInput(input) => println!("path {i}: {}", input.render()),
            OracleResult::ExhaustedNoInput => println!("path {i}: no input in the domain"),
        }
    }
}
