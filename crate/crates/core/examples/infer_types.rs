//! Type inference over annotated parameters and local assignments.

use pathforge::frontend::parse_unit;
use pathforge::typing::infer_types;

fn main() {
    let src = include_str!("../corpus/scale_mean.py");
    let unit = parse_unit(src, "scale_mean.py").unwrap();
    for f in &unit.functions {
        let env = infer_types(f).expect("types");
        println!("{}:\n{}", f.name, env.render());
    }
}
