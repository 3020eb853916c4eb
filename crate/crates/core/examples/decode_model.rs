//! Reads a solver model and decodes the list it describes.

use pathforge::frontend::parse_unit;
use pathforge::smt::parse_model;
use pathforge::testcase::decode_model;
use pathforge::translator::init_state;
use pathforge::typing::infer_types;

fn main() {
    let f = parse_unit("def f(xs: list[int]) -> int:\n    return 0\n", "f.py")
        .unwrap()
        .functions
        .remove(0);
    let env = infer_types(&f).unwrap();
    let (_, script) = init_state(&env, &f);
    let text = "(
  (define-fun _xs_0_len () Int 4)
  (define-fun _xs_0 () (Array Int Int) (store ((as const (Array Int Int)) 0) 2 3))
)";
    let model = parse_model(text, &script.decls).unwrap();
    println!("{}", decode_model(&model, &env, &script).unwrap().render());
}
