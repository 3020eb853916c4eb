//! Parses a program, prints it normalized, then shows what the subset
//! validator says about a construct it does not accept.

use pathforge::frontend::{parse_unit, parse_unit_lenient, pretty};

fn main() {
    let src = include_str!("../corpus/plus_one.py");
    let unit = parse_unit(src, "plus_one.py").expect("corpus programs are in the subset");
    print!("{}", pretty::unit(&unit));

    let outside = "def digits(n: int) -> int:\n    return len(str(n))\n";
    match parse_unit(outside, "digits.py") {
        Ok(_) => println!("accepted"),
        Err(e) => println!("\nstrict: {}", e.to_diagnostic().render("digits.py")),
    }
    let lenient = parse_unit_lenient(outside, "digits.py").unwrap();
    println!("lenient keeps {} function(s) with opaque nodes", lenient.functions.len());
}
