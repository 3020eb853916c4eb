use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::emit::emit_smtlib;
use super::model::{parse_model, Model};
use super::sexpr::{parse_all, Sexpr};
use super::term::Symbol;
use super::SmtScript;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Executable followed by its arguments; the query file is appended.
    pub command: Vec<String>,
    #[serde(with = "secs")]
    pub timeout: Duration,
    pub logic: String,
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        let cmd = std::env::var("PATHFORGE_SOLVER").unwrap_or_else(|_| "z3".to_string());
        Self::from_command_line(&cmd)
    }
}

impl SolverConfig {
    pub fn from_command_line(cmd: &str) -> Self {
        Self {
            command: cmd.split_whitespace().map(str::to_string).collect(),
            timeout: Duration::from_secs(10),
            logic: "ALL".to_string(),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverVerdict {
    Sat(Model),
    Unsat,
    Unknown(String),
    SolverFailure { exit: Option<i32>, stderr: String },
}

impl SolverVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            SolverVerdict::Sat(_) => "sat",
            SolverVerdict::Unsat => "unsat",
            SolverVerdict::Unknown(_) => "unknown",
            SolverVerdict::SolverFailure { .. } => "failure",
        }
    }

    pub fn is_sat(&self) -> bool {
        matches!(self, SolverVerdict::Sat(_))
    }
}

/// One solver invocation: the query text, raw output and decoded verdict.
#[derive(Debug, Clone)]
pub struct SolveRun {
    pub query: String,
    pub output: String,
    pub verdict: SolverVerdict,
    pub elapsed: Duration,
}

pub fn solve(script: &SmtScript, cfg: &SolverConfig) -> SolveRun {
    let query = emit_smtlib(script, &cfg.logic);
    solve_text(&query, &script.decls, cfg)
}

/// Whether the configured executable can be started at all.
pub fn solver_available(cfg: &SolverConfig) -> bool {
    let Some(exe) = cfg.command.first() else {
        return false;
    };
    Command::new(exe)
        .arg("--version")
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .is_ok()
}

fn excerpt(s: &str) -> String {
    let s = s.trim();
    if s.chars().count() > 400 {
        let cut: String = s.chars().take(400).collect();
        format!("{cut}...")
    } else {
        s.to_string()
    }
}

/// Runs a prepared query. `decls` gives the sorts used to read the model.
pub fn solve_text(query: &str, decls: &[Symbol], cfg: &SolverConfig) -> SolveRun {
    let start = Instant::now();
    let finish = |output: String, verdict: SolverVerdict| SolveRun {
        query: query.to_string(),
        output,
        verdict,
        elapsed: start.elapsed(),
    };
    let failure = |msg: String| SolverVerdict::SolverFailure {
        exit: None,
        stderr: msg,
    };
    let Some(exe) = cfg.command.first() else {
        return finish(String::new(), failure("empty solver command".into()));
    };
    let mut file = match tempfile::Builder::new().suffix(".smt2").tempfile() {
        Ok(f) => f,
        Err(e) => return finish(String::new(), failure(format!("temp file: {e}"))),
    };
    if let Err(e) = file.write_all(query.as_bytes()).and_then(|_| file.flush()) {
        return finish(String::new(), failure(format!("temp file: {e}")));
    }
    let mut child = match Command::new(exe)
        .args(&cfg.command[1..])
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return finish(String::new(), failure(format!("cannot start '{exe}': {e}"))),
    };
    let mut out_pipe = child.stdout.take().unwrap();
    let mut err_pipe = child.stderr.take().unwrap();
    let out_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = out_pipe.read_to_string(&mut s);
        s
    });
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = err_pipe.read_to_string(&mut s);
        s
    });
    let status = loop {
        match child.try_wait() {
            Ok(Some(st)) => break Some(st),
            Ok(None) if start.elapsed() >= cfg.timeout => {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            Ok(None) => thread::sleep(Duration::from_millis(2)),
            Err(e) => {
                let _ = child.kill();
                return finish(String::new(), failure(format!("wait: {e}")));
            }
        }
    };
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    let Some(status) = status else {
        return finish(stdout, SolverVerdict::Unknown("timeout".into()));
    };
    let verdict = read_output(&stdout, decls).unwrap_or_else(|msg| SolverVerdict::SolverFailure {
        exit: status.code(),
        stderr: excerpt(&format!("{msg}\n{stderr}")),
    });
    finish(stdout, verdict)
}

/// Interprets solver stdout. Errors printed after the verdict (a refused
/// `get-model` following `unsat`) are ignored.
fn read_output(stdout: &str, decls: &[Symbol]) -> Result<SolverVerdict, String> {
    let items = parse_all(stdout).map_err(|e| format!("unreadable solver output: {e}: {}", excerpt(stdout)))?;
    let mut iter = items.iter();
    for item in iter.by_ref() {
        match item {
            Sexpr::Atom(a) if a == "sat" => {
                let model_sx = iter.next().ok_or("sat without a model")?;
                if let Some(err) = error_message(model_sx) {
                    return Err(format!("get-model failed: {err}"));
                }
                let model = parse_model(&model_sx.to_string(), decls).map_err(|e| e.to_string())?;
                return Ok(SolverVerdict::Sat(model));
            }
            Sexpr::Atom(a) if a == "unsat" => return Ok(SolverVerdict::Unsat),
            Sexpr::Atom(a) if a == "unknown" => {
                return Ok(SolverVerdict::Unknown("solver returned unknown".into()))
            }
            Sexpr::Atom(a) if a == "success" => continue,
            other => {
                if let Some(err) = error_message(other) {
                    return Err(format!("solver error: {err}"));
                }
                return Err(format!("unexpected solver output `{}`", excerpt(&other.to_string())));
            }
        }
    }
    Err(format!("no verdict in solver output: {}", excerpt(stdout)))
}

fn error_message(s: &Sexpr) -> Option<String> {
    let items = s.as_list()?;
    if items.first()?.is_atom("error") {
        Some(match items.get(1) {
            Some(Sexpr::Str(m)) => m.clone(),
            Some(other) => other.to_string(),
            None => String::new(),
        })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::super::term::Sort;
    use super::*;

    #[test]
    fn unsat_followed_by_model_error() {
        let out = "unsat\n(error \"line 5 column 10: model is not available\")\n";
        assert_eq!(read_output(out, &[]).unwrap(), SolverVerdict::Unsat);
    }

    #[test]
    fn sat_with_model() {
        let out = "sat\n(\n  (define-fun _x_0 () Int\n    4)\n)\n";
        let v = read_output(out, &[Symbol::new("_x_0", Sort::Int)]).unwrap();
        let SolverVerdict::Sat(m) = v else { panic!() };
        assert_eq!(m.bindings["_x_0"].as_i64(), Some(4));
    }

    #[test]
    fn error_before_verdict_is_failure() {
        let out = "(error \"line 3 column 8: unknown constant x\")\nsat\n()\n";
        assert!(read_output(out, &[]).unwrap_err().contains("unknown constant"));
    }

    #[test]
    fn missing_executable_is_failure() {
        let cfg = SolverConfig::from_command_line("definitely-not-a-solver-xyz");
        let run = solve(&SmtScript::new("f"), &cfg);
        assert!(matches!(run.verdict, SolverVerdict::SolverFailure { .. }));
        assert!(!solver_available(&cfg));
    }
}
