use std::fmt::Write;

use super::SmtScript;

/// Renders the script as SMT-LIB 2 text. `get-model` is only requested when
/// there is something to report.
pub fn emit_smtlib(script: &SmtScript, logic: &str) -> String {
    let mut out = String::new();
    out.push_str("(set-option :produce-models true)\n");
    let _ = writeln!(out, "(set-logic {logic})");
    for d in &script.decls {
        let _ = writeln!(out, "(declare-const {} {})", d.name, d.sort);
    }
    for a in &script.asserts {
        let _ = writeln!(out, "(assert {a})");
    }
    out.push_str("(check-sat)\n");
    if !script.decls.is_empty() {
        out.push_str("(get-model)\n");
    }
    out
}
