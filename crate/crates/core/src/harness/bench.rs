//! Corpus runs. A corpus is a directory of `<name>.py` programs, each with an
//! optional `<name>.inputs` file holding one argument tuple per line, e.g.
//! `[3, 1, 2], 4`. Blank lines and `#` comments are skipped. When a program
//! has more than one function, lines name theirs: `twoSum: [2, 7], 9`.

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use crate::bridge::{Bridge, BridgeMode};
use crate::cfg::{build_cfg, enumerate_paths, ExecutionPath};
use crate::frontend::{parse_unit, parse_unit_lenient, FunctionDef, SourceUnit};
use crate::interp::{parse_args, run, ConcreteValue, Limits};
use crate::typing::{infer_types, TypeEnv};

use super::config::HarnessConfig;
use super::pipeline::{run_path, write_outputs, FunctionCtx, PathRecord};
use super::report::{ProgramFailure, RunReport};

#[derive(Debug, Clone)]
pub struct Program {
    pub file: String,
    pub source: String,
    pub unit: SourceUnit,
    /// Why the strict parse failed; the unit then keeps opaque nodes.
    pub outside_subset: Option<String>,
}

/// Parses a program, keeping out-of-subset constructs as opaque nodes when
/// the strict parse rejects them.
pub fn load_program(path: &Path) -> Result<Program, String> {
    let source = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let file = path
        .file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    match parse_unit(&source, &file) {
        Ok(unit) => Ok(Program {
            file,
            source,
            unit,
            outside_subset: None,
        }),
        Err(strict) => {
            let unit = parse_unit_lenient(&source, &file).map_err(|e| e.to_diagnostic().render(&file))?;
            Ok(Program {
                file: file.clone(),
                source,
                unit,
                outside_subset: Some(strict.to_diagnostic().render(&file)),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputLine {
    pub line: usize,
    pub function: Option<String>,
    pub args: String,
}

pub fn parse_inputs(text: &str) -> Vec<InputLine> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let (function, args) = match l.split_once(':') {
            Some((head, rest))
                if !head.trim().is_empty()
                    && head.trim().chars().all(|c| c.is_alphanumeric() || c == '_')
                    && !head.trim().starts_with(|c: char| c.is_ascii_digit()) =>
            {
                (Some(head.trim().to_string()), rest.trim().to_string())
            }
            _ => (None, l.to_string()),
        };
        out.push(InputLine {
            line: i + 1,
            function,
            args,
        });
    }
    out
}

/// Types for a function; when inference fails, records why.
pub fn function_types(f: &FunctionDef) -> Result<TypeEnv, String> {
    infer_types(f).map_err(|e| format!("types: {e}"))
}

/// The path an example input drives, cut at `max_steps`. A run that raised
/// ends at the raising step and is treated as truncated there.
pub fn example_target(f: &FunctionDef, env: &TypeEnv, args: &str, max_steps: usize) -> Result<ExecutionPath, String> {
    let values = parse_args(args).map_err(|e| e.to_string())?;
    if values.len() != env.params.len() {
        return Err(format!("expected {} arguments, got {}", env.params.len(), values.len()));
    }
    let values: Vec<ConcreteValue> = values
        .into_iter()
        .zip(&env.params)
        .map(|(v, (_, t))| v.coerce_to(*t).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let r = run(f, &values, Limits::default());
    let mut target = r.trace.truncate(max_steps);
    if r.raised().is_some() {
        target.truncated = true;
    }
    Ok(target)
}

struct Job {
    file: String,
    stem: String,
    source: String,
    f: FunctionDef,
    env: TypeEnv,
    targets: Vec<(usize, ExecutionPath)>,
}

fn jobs_for(program: &Program, stem: &str, cfg: &HarnessConfig, inputs: &[InputLine], failures: &mut Vec<ProgramFailure>) -> Vec<Job> {
    let mut jobs = Vec::new();
    let single = program.unit.functions.len() == 1;
    for f in &program.unit.functions {
        let fail = |reason: String| ProgramFailure {
            file: program.file.clone(),
            function: Some(f.name.clone()),
            reason,
        };
        let env = match function_types(f) {
            Ok(env) => env,
            Err(e) => {
                failures.push(fail(e));
                continue;
            }
        };
        let paths = enumerate_paths(&build_cfg(f), &cfg.bounds);
        let mut targets: Vec<(usize, ExecutionPath)> = Vec::new();
        if cfg.all_paths {
            targets.extend(paths.iter().cloned().enumerate());
        } else {
            let mine = inputs
                .iter()
                .filter(|l| l.function.as_deref() == Some(f.name.as_str()) || (single && l.function.is_none()));
            let mut extra = 0;
            for l in mine {
                match example_target(f, &env, &l.args, cfg.bounds.max_steps) {
                    Ok(t) if targets.iter().any(|(_, p)| *p == t) => {}
                    Ok(t) => {
                        let id = paths.iter().position(|p| *p == t).unwrap_or_else(|| {
                            extra += 1;
                            paths.len() + extra - 1
                        });
                        targets.push((id, t));
                    }
                    Err(e) => failures.push(fail(format!("inputs line {}: {e}", l.line))),
                }
            }
        }
        jobs.push(Job {
            file: program.file.clone(),
            stem: stem.to_string(),
            source: program.source.clone(),
            f: f.clone(),
            env,
            targets,
        });
    }
    jobs
}

/// Python files of a corpus directory in name order.
pub fn corpus_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "py"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn bench(corpus: &Path, cfg: &HarnessConfig, bridge: Option<&Bridge>) -> std::io::Result<RunReport> {
    let mut failures = Vec::new();
    let mut jobs = Vec::new();
    for path in corpus_files(corpus)? {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let program = match load_program(&path) {
            Ok(p) => p,
            Err(reason) => {
                failures.push(ProgramFailure {
                    file: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                    function: None,
                    reason,
                });
                continue;
            }
        };
        if let Some(d) = &program.outside_subset {
            warn!("{d}; unsupported steps will be reported per path");
        }
        let inputs = match fs::read_to_string(path.with_extension("inputs")) {
            Ok(t) => parse_inputs(&t),
            Err(_) => Vec::new(),
        };
        jobs.extend(jobs_for(&program, &stem, cfg, &inputs, &mut failures));
    }
    let tasks: Vec<(&Job, &(usize, ExecutionPath))> = jobs.iter().flat_map(|j| j.targets.iter().map(move |t| (j, t))).collect();
    info!("benching {} paths from {} functions", tasks.len(), jobs.len());
    fs::create_dir_all(&cfg.out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(std::io::Error::other)?;
    let records: Vec<std::io::Result<PathRecord>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(job, (id, path))| {
                let ctx = FunctionCtx {
                    file: &job.file,
                    source: &job.source,
                    f: &job.f,
                    env: &job.env,
                };
                let mut out = run_path(ctx, path, *id, &cfg.solver, bridge);
                let dir = cfg.out_dir.join(&job.stem).join(&job.f.name);
                write_outputs(&mut out, &cfg.out_dir, &dir, &format!("p{id}"), &cfg.solver, cfg.keep_smt)?;
                Ok(out.record)
            })
            .collect()
    });
    let records = records.into_iter().collect::<std::io::Result<Vec<_>>>()?;
    let mode = match &cfg.bridge.mode {
        BridgeMode::Off => "off",
        BridgeMode::Replay(_) => "replay",
        BridgeMode::Live => "live",
    };
    let report = RunReport::new(mode.to_string(), cfg.bridge.k, records, failures);
    fs::write(cfg.out_dir.join("report.json"), report.to_json() + "\n")?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_lines() {
        let got = parse_inputs("# header\n[1, 2], 3\n\ntwoSum: [2, 7], 9\n  -1\n");
        assert_eq!(
            got,
            vec![
                InputLine { line: 2, function: None, args: "[1, 2], 3".into() },
                InputLine { line: 4, function: Some("twoSum".into()), args: "[2, 7], 9".into() },
                InputLine { line: 5, function: None, args: "-1".into() },
            ]
        );
    }
}
