//! The `pathforge` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::bridge::{Bridge, BridgeMode};
use crate::cfg::{align_trace, build_cfg, enumerate_paths, ChunkStrategy, ExecutionPath};
use crate::frontend::{pretty, validate_subset, FunctionDef, SourceUnit};
use crate::interp::{parse_args, run, ConcreteValue, Limits, Outcome, PathVerdict};
use crate::smt::{emit_smtlib, solver_available};
use crate::translator::{translate_path, TranslationOutcome};

use super::bench::{bench, function_types, load_program, Program};
use super::config::{ConfigError, HarnessConfig};
use super::pipeline::{run_path, write_outputs, FunctionCtx, SolveStatus, TranslationSource};
use super::report::{render_grid, render_table, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_WRONG_INPUT: i32 = 1;
pub const EXIT_NO_INPUT: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_UNAVAILABLE: i32 = 69;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(name = "pathforge", version, about = "Bounded-path symbolic execution for a Python subset")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BridgeArg {
    Off,
    Replay,
    Live,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChunkArg {
    Line,
    Condition,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Solver command line; the query file is appended.
    #[arg(long, global = true)]
    pub solver_cmd: Option<String>,
    /// Solver timeout in seconds.
    #[arg(long, global = true)]
    pub timeout: Option<f64>,
    #[arg(long, global = true)]
    pub max_steps: Option<usize>,
    #[arg(long, global = true)]
    pub max_loop_iterations: Option<u32>,
    #[arg(long, global = true)]
    pub max_paths: Option<usize>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Keep SMT queries, assertion maps and raw solver output.
    #[arg(long, global = true)]
    pub keep_smt: bool,
    #[arg(long, global = true, value_enum)]
    pub bridge: Option<BridgeArg>,
    /// Fixture directory for `--bridge replay`.
    #[arg(long, global = true)]
    pub fixtures: Option<PathBuf>,
    #[arg(long, global = true)]
    pub templates_k: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub chunking: Option<ChunkArg>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Args)]
pub struct Target {
    pub file: PathBuf,
    /// Needed when the file defines more than one function.
    #[arg(long)]
    pub function: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a file, printing the normalized source.
    Parse { file: PathBuf },
    /// Print inferred variable types.
    Types(Target),
    /// Print the control-flow graph.
    Cfg(Target),
    /// List bounded execution paths.
    Paths(Target),
    /// Run a function concretely and print its trace.
    Run {
        #[command(flatten)]
        target: Target,
        /// Argument literals, e.g. `[1, 2], 3`.
        #[arg(long, allow_hyphen_values = true)]
        args: String,
    },
    /// Print the SMT-LIB query for one path.
    Translate {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        path: usize,
    },
    /// Generate and check a test input for one path.
    SolvePath {
        #[command(flatten)]
        target: Target,
        /// Index from the `paths` listing.
        #[arg(long, conflicts_with = "trace", required_unless_present = "trace")]
        path: Option<usize>,
        /// File of executed line numbers to align to a path.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the pipeline over a corpus directory.
    Bench {
        corpus: Option<PathBuf>,
        /// Every enumerated path instead of the example traces.
        #[arg(long)]
        all_paths: bool,
    },
    /// Render saved reports; several reports give a grid over k.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

struct Failure(i32, String);

type CmdResult = Result<i32, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

fn data(msg: impl Into<String>) -> Failure {
    Failure(EXIT_DATA, msg.into())
}

fn io(e: std::io::Error) -> Failure {
    Failure(EXIT_IO, e.to_string())
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        usage(e.to_string())
    }
}

/// Builds the effective configuration: defaults, config file, flags.
pub fn effective_config(g: &GlobalArgs) -> Result<HarnessConfig, ConfigError> {
    let mut cfg = match &g.config {
        Some(p) => HarnessConfig::from_file(p)?,
        None => HarnessConfig::default(),
    };
    if let Some(c) = &g.solver_cmd {
        cfg.solver.command = crate::smt::SolverConfig::from_command_line(c).command;
    }
    if let Some(t) = g.timeout {
        cfg.solver.timeout =
            Duration::try_from_secs_f64(t).map_err(|e| ConfigError::Value(format!("bad timeout {t}: {e}")))?;
    }
    if let Some(v) = g.max_steps {
        cfg.bounds.max_steps = v;
    }
    if let Some(v) = g.max_loop_iterations {
        cfg.bounds.max_loop_iterations = v;
    }
    if let Some(v) = g.max_paths {
        cfg.bounds.max_paths = v;
    }
    if let Some(v) = g.jobs {
        cfg.jobs = v;
    }
    cfg.keep_smt |= g.keep_smt;
    let fixtures = g.fixtures.clone().or_else(|| match &cfg.bridge.mode {
        BridgeMode::Replay(d) => Some(d.clone()),
        _ => None,
    });
    match g.bridge {
        Some(BridgeArg::Off) => cfg.bridge.mode = BridgeMode::Off,
        Some(BridgeArg::Live) => cfg.bridge.mode = BridgeMode::Live,
        Some(BridgeArg::Replay) => {
            cfg.bridge.mode = BridgeMode::Replay(
                fixtures.ok_or_else(|| ConfigError::Value("--bridge replay needs --fixtures <dir>".into()))?,
            )
        }
        None => {
            if let (Some(f), BridgeMode::Replay(_)) = (g.fixtures.clone(), &cfg.bridge.mode) {
                cfg.bridge.mode = BridgeMode::Replay(f);
            }
        }
    }
    if let Some(k) = g.templates_k {
        cfg.bridge.k = k;
    }
    match g.chunking {
        Some(ChunkArg::Line) => cfg.bridge.chunking = ChunkStrategy::ByLine,
        Some(ChunkArg::Condition) => cfg.bridge.chunking = ChunkStrategy::ByCondition,
        None => {}
    }
    if let Some(o) = &g.out {
        cfg.out_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load(file: &Path) -> Result<Program, Failure> {
    let p = load_program(file).map_err(data)?;
    if let Some(d) = &p.outside_subset {
        eprintln!("warning: {d}");
    }
    Ok(p)
}

fn pick<'a>(unit: &'a SourceUnit, name: Option<&str>) -> Result<&'a FunctionDef, Failure> {
    match name {
        Some(n) => unit
            .function(n)
            .ok_or_else(|| usage(format!("no function '{n}' in {}", unit.path))),
        None if unit.functions.len() == 1 => Ok(&unit.functions[0]),
        None => Err(usage(format!(
            "{} defines {} functions; choose one with --function",
            unit.path,
            unit.functions.len()
        ))),
    }
}

fn select_path(f: &FunctionDef, cfg: &HarnessConfig, index: usize) -> Result<ExecutionPath, Failure> {
    let paths = enumerate_paths(&build_cfg(f), &cfg.bounds);
    paths.get(index).cloned().ok_or_else(|| {
        usage(format!("path {index} does not exist; '{}' has {} paths", f.name, paths.len()))
    })
}

fn cmd_parse(file: &Path) -> CmdResult {
    let src = fs::read_to_string(file).map_err(|e| data(format!("{}: {e}", file.display())))?;
    let name = file.display().to_string();
    let unit = match crate::frontend::parse_unit(&src, &name) {
        Ok(u) => u,
        Err(e) => {
            println!("{}", e.to_diagnostic().render(&name));
            return Ok(EXIT_DATA);
        }
    };
    let diags = validate_subset(&unit);
    if !diags.is_empty() {
        for d in diags {
            println!("{}", d.render(&name));
        }
        return Ok(EXIT_DATA);
    }
    print!("{}", pretty::unit(&unit));
    Ok(EXIT_OK)
}

fn cmd_types(t: &Target) -> CmdResult {
    let p = load(&t.file)?;
    let fs: Vec<&FunctionDef> = match &t.function {
        Some(_) => vec![pick(&p.unit, t.function.as_deref())?],
        None => p.unit.functions.iter().collect(),
    };
    let mut code = EXIT_OK;
    for f in fs {
        println!("def {}:", f.name);
        match function_types(f) {
            Ok(env) => {
                for line in env.render().lines() {
                    println!("  {line}");
                }
                if let Some(r) = env.return_type {
                    println!("  return: {r}");
                }
                for w in &env.warnings {
                    eprintln!("warning: {}: {w}", f.name);
                }
            }
            Err(e) => {
                println!("  error: {e}");
                code = EXIT_DATA;
            }
        }
    }
    Ok(code)
}

fn cmd_cfg(t: &Target) -> CmdResult {
    let p = load(&t.file)?;
    let f = pick(&p.unit, t.function.as_deref())?;
    print!("{}", build_cfg(f).render());
    Ok(EXIT_OK)
}

fn cmd_paths(t: &Target, cfg: &HarnessConfig) -> CmdResult {
    let p = load(&t.file)?;
    let f = pick(&p.unit, t.function.as_deref())?;
    for (i, path) in enumerate_paths(&build_cfg(f), &cfg.bounds).iter().enumerate() {
        let trunc = if path.truncated { ", truncated" } else { "" };
        println!("path {i} ({} steps{trunc})", path.steps.len());
        print!("{}", path.render());
    }
    Ok(EXIT_OK)
}

fn cmd_run(t: &Target, args: &str) -> CmdResult {
    let p = load(&t.file)?;
    let f = pick(&p.unit, t.function.as_deref())?;
    let env = function_types(f).map_err(data)?;
    let values = parse_args(args).map_err(|e| usage(e.to_string()))?;
    if values.len() != env.params.len() {
        return Err(usage(format!(
            "'{}' takes {} arguments, got {}",
            f.name,
            env.params.len(),
            values.len()
        )));
    }
    let values: Vec<ConcreteValue> = values
        .into_iter()
        .zip(&env.params)
        .map(|(v, (_, ty))| v.coerce_to(*ty))
        .collect::<Result<_, _>>()
        .map_err(|e| usage(e.to_string()))?;
    let r = run(f, &values, Limits::default());
    print!("{}", r.trace.render());
    match &r.outcome {
        Outcome::Returned(Some(v)) => println!("returned {v}"),
        Outcome::Returned(None) => println!("returned None"),
        Outcome::Raised { kind, message } => println!("raised {kind}: {message}"),
    }
    Ok(EXIT_OK)
}

fn cmd_translate(t: &Target, index: usize, cfg: &HarnessConfig, to_disk: bool) -> CmdResult {
    let p = load(&t.file)?;
    let f = pick(&p.unit, t.function.as_deref())?;
    let env = function_types(f).map_err(data)?;
    let path = select_path(f, cfg, index)?;
    match translate_path(&path, &env) {
        TranslationOutcome::Translated { script, .. } => {
            let query = emit_smtlib(&script, &cfg.solver.logic);
            print!("{query}");
            if to_disk {
                fs::create_dir_all(&cfg.out_dir).map_err(io)?;
                let stem = cfg.out_dir.join(format!("{}.p{index}", f.name));
                fs::write(stem.with_extension("smt2"), &query).map_err(io)?;
                fs::write(stem.with_extension("map"), script.origin_map()).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        TranslationOutcome::Unsupported(u) => {
            eprintln!("unsupported: {u}");
            Ok(EXIT_UNSUPPORTED)
        }
    }
}

fn read_trace(file: &Path) -> Result<Vec<u32>, Failure> {
    let text = fs::read_to_string(file).map_err(|e| data(format!("{}: {e}", file.display())))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().map_err(|_| data(format!("bad line number '{s}' in {}", file.display()))))
        .collect()
}

fn make_bridge(cfg: &HarnessConfig) -> Result<Option<Bridge>, Failure> {
    Bridge::from_config(cfg.bridge.clone(), cfg.solver.clone(), Some(cfg.out_dir.join("transcripts")))
        .map_err(|e| usage(e.to_string()))
}

fn cmd_solve_path(t: &Target, index: Option<usize>, trace: Option<&Path>, cfg: &HarnessConfig) -> CmdResult {
    let p = load(&t.file)?;
    let f = pick(&p.unit, t.function.as_deref())?;
    let env = function_types(f).map_err(data)?;
    let (path, id) = match (index, trace) {
        (Some(i), _) => (select_path(f, cfg, i)?, i),
        (None, Some(tf)) => {
            let lines = read_trace(tf)?;
            let path = align_trace(&build_cfg(f), &lines)
                .map_err(|e| usage(format!("cannot align trace: {e}")))?
                .truncate(cfg.bounds.max_steps);
            let listing = enumerate_paths(&build_cfg(f), &cfg.bounds);
            let id = listing.iter().position(|q| *q == path).unwrap_or(listing.len());
            (path, id)
        }
        (None, None) => return Err(usage("give --path or --trace")),
    };
    if !solver_available(&cfg.solver) {
        return Err(Failure(
            EXIT_UNAVAILABLE,
            format!("solver '{}' cannot be started", cfg.solver.command.join(" ")),
        ));
    }
    let bridge = make_bridge(cfg)?;
    let ctx = FunctionCtx {
        file: &p.file,
        source: &p.source,
        f,
        env: &env,
    };
    let mut out = run_path(ctx, &path, id, &cfg.solver, bridge.as_ref());
    let stem = format!("{}.p{id}", f.name);
    write_outputs(&mut out, &cfg.out_dir, &cfg.out_dir, &stem, &cfg.solver, true).map_err(io)?;
    if let Some(run) = &out.solve {
        if let crate::smt::SolverVerdict::Sat(_) = run.verdict {
            fs::write(cfg.out_dir.join(format!("{stem}.model")), &run.output).map_err(io)?;
        }
    }
    let r = &out.record;
    let verdict = r.test_verdict.as_ref().map_or("none", |v| v.label());
    fs::write(
        cfg.out_dir.join(format!("{stem}.verdict")),
        format!("{}\t{}\n", serde_json::to_string(&r.status).unwrap_or_default().trim_matches('"'), verdict),
    )
    .map_err(io)?;
    let source = match r.source {
        Some(TranslationSource::Rules) => "rules",
        Some(TranslationSource::Bridge) => "bridge",
        Some(TranslationSource::Fallback) => "fallback",
        None => "none",
    };
    println!("function: {}", f.name);
    println!("path: {id} ({} steps)", path.steps.len());
    println!("translation: {source}");
    println!("solver: {:?}", r.status);
    if let Some(i) = &r.input {
        println!("input: {i}");
    }
    if let Some(a) = &out.artifact {
        println!("test: {}", a.snippet());
    }
    println!("verdict: {verdict}");
    if let Some(d) = &r.detail {
        println!("detail: {d}");
    }
    Ok(match (r.status, &r.test_verdict) {
        (_, Some(PathVerdict::PathCorrect)) => EXIT_OK,
        (SolveStatus::Sat, _) => EXIT_WRONG_INPUT,
        (SolveStatus::Unsat | SolveStatus::Unknown, _) => EXIT_NO_INPUT,
        (SolveStatus::Unsupported, _) => EXIT_UNSUPPORTED,
        (SolveStatus::Error, _) => EXIT_UNAVAILABLE,
    })
}

fn cmd_bench(corpus: Option<&Path>, all_paths: bool, cfg: &HarnessConfig) -> CmdResult {
    let mut cfg = cfg.clone();
    cfg.all_paths |= all_paths;
    let dir = corpus
        .map(Path::to_path_buf)
        .or_else(|| cfg.corpus_dir.clone())
        .ok_or_else(|| usage("no corpus directory given"))?;
    if !dir.is_dir() {
        return Err(usage(format!("corpus directory does not exist: {}", dir.display())));
    }
    if !solver_available(&cfg.solver) {
        return Err(Failure(
            EXIT_UNAVAILABLE,
            format!("solver '{}' cannot be started", cfg.solver.command.join(" ")),
        ));
    }
    let bridge = make_bridge(&cfg)?;
    let report = bench(&dir, &cfg, bridge.as_ref()).map_err(io)?;
    info!("report written to {}", cfg.out_dir.join("report.json").display());
    print!("{}", render_table(&report));
    Ok(EXIT_OK)
}

fn cmd_report(files: &[PathBuf]) -> CmdResult {
    let mut reports = Vec::new();
    for f in files {
        let text = fs::read_to_string(f).map_err(|e| data(format!("{}: {e}", f.display())))?;
        let r = RunReport::from_json(&text).map_err(|e| data(format!("{}: {e}", f.display())))?;
        reports.push(r);
    }
    if let [one] = reports.as_slice() {
        print!("{}", render_table(one));
    } else {
        print!("{}", render_grid(&reports));
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli) -> CmdResult {
    let cfg = || effective_config(&cli.global).map_err(Failure::from);
    match &cli.command {
        Command::Parse { file } => cmd_parse(file),
        Command::Types(t) => cmd_types(t),
        Command::Cfg(t) => cmd_cfg(t),
        Command::Paths(t) => cmd_paths(t, &cfg()?),
        Command::Run { target, args } => cmd_run(target, args),
        Command::Translate { target, path } => cmd_translate(target, *path, &cfg()?, cli.global.out.is_some()),
        Command::SolvePath { target, path, trace } => cmd_solve_path(target, *path, trace.as_deref(), &cfg()?),
        Command::Bench { corpus, all_paths } => cmd_bench(corpus.as_deref(), *all_paths, &cfg()?),
        Command::Report { reports } => cmd_report(reports),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}
