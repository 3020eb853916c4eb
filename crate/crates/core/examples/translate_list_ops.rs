//! SMT-LIB encodings of the list operations: length, indexing, element
//! assignment, append, pop and negative indexing.

use pathforge::cfg::{build_cfg, enumerate_paths, Bounds};
use pathforge::frontend::parse_unit;
use pathforge::smt::emit_smtlib;
use pathforge::translator::translate_path;
use pathforge::typing::infer_types;

const ROWS: [&str; 6] = [
    "def f(n: list[int]) -> int:\n    if len(n) > 5:\n        return 1\n    return 0\n",
    "def f(lst: list[int], i: int, j: int) -> int:\n    if lst[i] == j:\n        return 1\n    return 0\n",
    "def f(lst: list[int], i: int) -> int:\n    lst[i] = 2\n    return 0\n",
    "def f(n: list[int], x: int) -> int:\n    n.append(x)\n    return 0\n",
    "def f(n: list[int]) -> int:\n    n.pop()\n    return 0\n",
    "def f(lst: list[int], z: int) -> int:\n    if lst[-2] == z:\n        return 1\n    return 0\n",
];

fn main() {
    for src in ROWS {
        let f = parse_unit(src, "row.py").unwrap().functions.remove(0);
        let env = infer_types(&f).unwrap();
        let path = enumerate_paths(&build_cfg(&f), &Bounds::default()).remove(0);
        let script = translate_path(&path, &env).script().cloned().expect("in the subset");
        println!("# {}", src.lines().nth(1).unwrap().trim());
        println!("{}", emit_smtlib(&script, "ALL"));
    }
}
