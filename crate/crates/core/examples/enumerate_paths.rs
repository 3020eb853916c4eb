//! Builds a control-flow graph and lists its bounded paths.

use pathforge::cfg::{build_cfg, enumerate_paths, Bounds};
use pathforge::frontend::parse_unit;

fn main() {
    let src = include_str!("../corpus/digit_sum.py");
    let f = parse_unit(src, "digit_sum.py").unwrap().functions.remove(0);
    let cfg = build_cfg(&f);
    print!("{}", cfg.render());
    let bounds = Bounds {
        max_loop_iterations: 2,
        ..Bounds::default()
    };
    for (i, p) in enumerate_paths(&cfg, &bounds).iter().enumerate() {
        let t = if p.truncated { ", truncated" } else { "" };
        println!("\npath {i} ({} steps{t})\n{}", p.steps.len(), p.render().trim_end());
    }
}
