//! One path through translate, solve, decode and replay.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bridge::{Bridge, BridgeOutcome};
use crate::cfg::{chunk_path, ExecutionPath, PathChunk};
use crate::frontend::FunctionDef;
use crate::interp::{path_verdict, PathVerdict};
use crate::smt::{emit_smtlib, solve, Origin, SmtScript, SolveRun, SolverConfig, SolverVerdict};
use crate::testcase::{decode_model, emit_artifact, TestArtifact, TestInput};
use crate::translator::{translate_step, SsaEnv, Unsupported};
use crate::typing::TypeEnv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TranslationSource {
    Rules,
    Bridge,
    Fallback,
}

/// Solver-side result of a path. Unknown includes timeouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Sat,
    Unsat,
    Unknown,
    Unsupported,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub file: String,
    pub function: String,
    pub path_id: usize,
    pub steps: usize,
    pub truncated: bool,
    pub source: Option<TranslationSource>,
    pub status: SolveStatus,
    /// Set only when an input was obtained.
    pub test_verdict: Option<PathVerdict>,
    pub input: Option<String>,
    /// Artifact file, relative to the output directory.
    pub artifact: Option<String>,
    pub detail: Option<String>,
    pub time_ms: f64,
}

impl PathRecord {
    pub fn path_correct(&self) -> bool {
        self.test_verdict == Some(PathVerdict::PathCorrect)
    }

    pub fn execution_pass(&self) -> bool {
        matches!(
            self.test_verdict,
            Some(PathVerdict::PathCorrect | PathVerdict::ExecutionPassOnly)
        )
    }
}

/// Everything produced for one path.
#[derive(Debug, Clone)]
pub struct PathOutcome {
    pub record: PathRecord,
    pub script: Option<SmtScript>,
    pub solve: Option<SolveRun>,
    pub input: Option<TestInput>,
    pub artifact: Option<TestArtifact>,
}

enum Translation {
    Done(SmtScript, TranslationSource),
    Stuck(String),
}

fn containing_chunk(chunks: &[PathChunk], i: usize) -> PathChunk {
    let c = chunks
        .iter()
        .find(|c| c.offset <= i && i < c.offset + c.steps.len())
        .expect("chunks cover the path");
    PathChunk {
        steps: c.steps[i - c.offset..].to_vec(),
        strategy: c.strategy,
        offset: i,
    }
}

/// Rule translation; with a bridge, rejected steps are sent out chunk by chunk.
fn translate(path: &ExecutionPath, env: &TypeEnv, bridge: Option<&Bridge>) -> Translation {
    let mut state = SsaEnv::new(env.clone());
    let mut script = SmtScript::new(&path.function);
    let mut source = TranslationSource::Rules;
    let chunks = bridge.map(|b| chunk_path(path, b.config.chunking));
    let mut i = 0;
    while i < path.steps.len() {
        let (saved_state, saved_script) = (state.clone(), script.clone());
        let err = match translate_step(&mut state, &mut script, i, &path.steps[i]) {
            Ok(()) => {
                i += 1;
                continue;
            }
            Err(u) => u,
        };
        let (Some(b), Some(chunks)) = (bridge, chunks.as_ref()) else {
            return Translation::Stuck(describe(&err));
        };
        state = saved_state;
        script = saved_script;
        let chunk = containing_chunk(chunks, i);
        match b.fragment_for(&chunk, &state.index, &script) {
            Ok(BridgeOutcome::Fragment(fr)) => {
                for d in fr.decls {
                    script.declare(d);
                }
                for a in fr.asserts {
                    script.assert(a, Origin { step: i, synthetic: false });
                }
                state.index.extend(fr.env_out);
                source = TranslationSource::Bridge;
                i = chunk.offset + chunk.steps.len();
            }
            Ok(BridgeOutcome::BridgeFailed { reason, attempts }) => {
                return Translation::Stuck(format!(
                    "{}; bridge gave up after {attempts} attempts: {reason}",
                    describe(&err)
                ))
            }
            Ok(other) => return Translation::Stuck(format!("unexpected bridge outcome {other:?}")),
            Err(e) => return Translation::Stuck(format!("{}; bridge transport: {e}", describe(&err))),
        }
    }
    Translation::Done(script, source)
}

fn describe(u: &Unsupported) -> String {
    u.to_string()
}

/// Inputs shared by the paths of one function.
#[derive(Debug, Clone, Copy)]
pub struct FunctionCtx<'a> {
    pub file: &'a str,
    pub source: &'a str,
    pub f: &'a FunctionDef,
    pub env: &'a TypeEnv,
}

pub fn run_path(
    ctx: FunctionCtx<'_>,
    path: &ExecutionPath,
    path_id: usize,
    solver: &SolverConfig,
    bridge: Option<&Bridge>,
) -> PathOutcome {
    let start = Instant::now();
    let mut out = PathOutcome {
        record: PathRecord {
            file: ctx.file.to_string(),
            function: ctx.f.name.clone(),
            path_id,
            steps: path.steps.len(),
            truncated: path.truncated,
            source: None,
            status: SolveStatus::Unsupported,
            test_verdict: None,
            input: None,
            artifact: None,
            detail: None,
            time_ms: 0.0,
        },
        script: None,
        solve: None,
        input: None,
        artifact: None,
    };
    match translate(path, ctx.env, bridge) {
        Translation::Done(script, source) => {
            out.record.source = Some(source);
            let run = solve(&script, solver);
            match &run.verdict {
                SolverVerdict::Sat(model) => {
                    out.record.status = SolveStatus::Sat;
                    match decode_model(model, ctx.env, &script) {
                        Ok(input) => accept_input(&mut out, ctx, path, input),
                        Err(e) => {
                            out.record.test_verdict = Some(PathVerdict::Failed(format!("decode: {e}")));
                            out.record.detail = Some(e.to_string());
                        }
                    }
                }
                SolverVerdict::Unsat => out.record.status = SolveStatus::Unsat,
                SolverVerdict::Unknown(why) => {
                    out.record.status = SolveStatus::Unknown;
                    out.record.detail = Some(why.clone());
                }
                SolverVerdict::SolverFailure { exit, stderr } => {
                    out.record.status = SolveStatus::Error;
                    out.record.detail = Some(format!("solver exit {exit:?}: {stderr}"));
                }
            }
            out.script = Some(script);
            out.solve = Some(run);
        }
        Translation::Stuck(why) => {
            out.record.detail = Some(why);
            if let Some(b) = bridge {
                fallback(&mut out, ctx, path, b);
            }
        }
    }
    out.record.time_ms = start.elapsed().as_secs_f64() * 1000.0;
    out
}

fn accept_input(out: &mut PathOutcome, ctx: FunctionCtx<'_>, path: &ExecutionPath, input: TestInput) {
    let verdict = path_verdict(ctx.f, &input, path);
    out.record.input = Some(input.render());
    out.artifact = Some(emit_artifact(
        &input,
        ctx.f,
        ctx.file,
        out.record.path_id,
        Some(verdict.label()),
    ));
    out.record.test_verdict = Some(verdict);
    out.input = Some(input);
}

fn fallback(out: &mut PathOutcome, ctx: FunctionCtx<'_>, path: &ExecutionPath, b: &Bridge) {
    let prior = out.record.detail.take().unwrap_or_default();
    match b.solve_directly(ctx.source, ctx.f, ctx.env, path) {
        Ok(BridgeOutcome::FallbackInput { input, .. }) => {
            out.record.source = Some(TranslationSource::Fallback);
            out.record.status = SolveStatus::Sat;
            accept_input(out, ctx, path, input);
            out.record.detail = Some(prior);
        }
        Ok(BridgeOutcome::FallbackUnsat) => {
            out.record.source = Some(TranslationSource::Fallback);
            out.record.status = SolveStatus::Unsat;
            out.record.detail = Some(format!("{prior}; unsatisfiability claimed by the model, unverified"));
        }
        Ok(BridgeOutcome::BridgeFailed { reason, attempts }) => {
            out.record.detail = Some(format!("{prior}; direct solve failed after {attempts} attempts: {reason}"));
        }
        Ok(other) => out.record.detail = Some(format!("{prior}; unexpected bridge outcome {other:?}")),
        Err(e) => out.record.detail = Some(format!("{prior}; bridge transport: {e}")),
    }
}

/// Writes the outcome's files under `dir` as `<stem>.*` and records the
/// artifact's path relative to `root`.
pub fn write_outputs(
    out: &mut PathOutcome,
    root: &Path,
    dir: &Path,
    stem: &str,
    solver: &SolverConfig,
    keep_smt: bool,
) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    if keep_smt {
        if let Some(script) = &out.script {
            fs::write(dir.join(format!("{stem}.smt2")), emit_smtlib(script, &solver.logic))?;
            fs::write(dir.join(format!("{stem}.map")), script.origin_map())?;
        }
        if let Some(run) = &out.solve {
            fs::write(dir.join(format!("{stem}.out")), &run.output)?;
        }
    }
    if let Some(a) = &out.artifact {
        let path = dir.join(format!("{stem}.jsonl"));
        fs::write(&path, a.to_line() + "\n")?;
        let rel = path.strip_prefix(root).unwrap_or(&path);
        out.record.artifact = Some(rel.to_string_lossy().into_owned());
    }
    Ok(())
}
