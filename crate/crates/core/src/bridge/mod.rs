//! Generative fallback for path steps the rule translator rejects.
//!
//! A model is asked for SMT-LIB constraints (never code), guided by the most
//! similar templates from a small knowledge base. Nothing it returns is used
//! before it has been checked: fragments must parse, reference declared
//! symbols and be accepted by the solver together with the script so far;
//! proposed inputs are replayed in the interpreter.

mod templates;
mod transport;

use std::collections::BTreeMap;
use std::path::PathBuf;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::cfg::{ChunkStrategy, ExecutionPath, PathChunk};
use crate::frontend::FunctionDef;
use crate::interp::{parse_args, path_verdict, PathVerdict};
use crate::smt::sexpr::{parse_all, Sexpr};
use crate::smt::{solve, SmtScript, SolverConfig, SolverVerdict, Sort, Symbol, Term};
use crate::testcase::TestInput;
use crate::translator::ssa_name;
use crate::typing::{SubsetType, TypeEnv};

pub use templates::{tokenize, Template, TemplateStore};
#[cfg(feature = "live")]
pub use transport::LiveTransport;
pub use transport::{
    render_prompt, system_prompt, BridgeRequest, Exchange, Feedback, FragmentRequest, ReplayTransport, SolveRequest,
    Transport, TransportError,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BridgeMode {
    Off,
    Replay(PathBuf),
    Live,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeConfig {
    pub endpoint: Option<String>,
    pub model: String,
    pub api_key_env: String,
    pub k: usize,
    /// Total attempts per chunk, the first one included.
    pub max_refine: u32,
    pub chunking: ChunkStrategy,
    pub mode: BridgeMode,
    pub max_in_flight: usize,
}

impl Default for BridgeConfig {
    fn default() -> Self {
        Self {
            endpoint: std::env::var("PATHFORGE_LLM_ENDPOINT").ok(),
            model: "gpt-4o-mini".into(),
            api_key_env: "PATHFORGE_LLM_KEY".into(),
            k: 2,
            max_refine: 3,
            chunking: ChunkStrategy::ByLine,
            mode: BridgeMode::Off,
            max_in_flight: 4,
        }
    }
}

/// Constraints accepted for one chunk.
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub text: String,
    /// Symbols the fragment declares that the prior script lacked.
    pub decls: Vec<Symbol>,
    pub asserts: Vec<Term>,
    pub env_out: BTreeMap<String, u32>,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BridgeOutcome {
    Fragment(Fragment),
    FallbackInput { input: TestInput, verdict: PathVerdict },
    /// The model's claim; nothing checks it.
    FallbackUnsat,
    BridgeFailed { reason: String, attempts: u32 },
}

/// Checks a fragment against the script it extends. On success returns the
/// new declarations and the assertions.
pub fn validate_fragment(
    text: &str,
    env_in: &BTreeMap<String, u32>,
    env_out: &BTreeMap<String, u32>,
    prior: &SmtScript,
) -> Result<(Vec<Symbol>, Vec<Term>), String> {
    let cmds = parse_all(text).map_err(|e| format!("syntax error: {e}"))?;
    let mut decls: Vec<Symbol> = Vec::new();
    let mut asserts = Vec::new();
    let known = |name: &str, decls: &[Symbol]| {
        prior.decls.iter().chain(decls).find(|d| d.name == name).cloned()
    };
    for c in &cmds {
        let items = c.as_list().ok_or_else(|| format!("expected a command, found {c}"))?;
        let head = items.first().and_then(Sexpr::as_atom).unwrap_or("");
        match (head, items.len()) {
            ("declare-const", 3) | ("declare-fun", 4) => {
                let name = items[1].as_atom().ok_or_else(|| format!("bad symbol in {c}"))?;
                if head == "declare-fun" && items[2].as_list().is_none_or(|l| !l.is_empty()) {
                    return Err(format!("only nullary functions can be declared: {c}"));
                }
                let sort = Sort::from_sexpr(items.last().expect("checked length"))?;
                match known(name, &decls) {
                    Some(d) if d.sort != sort => {
                        return Err(format!("'{name}' redeclared as {sort}, previously {}", d.sort))
                    }
                    Some(_) => {}
                    None => decls.push(Symbol::new(name, sort)),
                }
            }
            ("assert", 2) => {
                let t = Term::from_sexpr(&items[1])?;
                for s in t.symbols() {
                    if known(s, &decls).is_none() {
                        return Err(format!("undeclared symbol '{s}'"));
                    }
                }
                asserts.push(t);
            }
            _ => return Err(format!("unsupported command {c}")),
        }
    }
    for (v, k) in env_out {
        if env_in.get(v).is_some_and(|old| k < old) {
            return Err(format!("env_out lowers the index of '{v}' from {} to {k}", env_in[v]));
        }
        if env_in.get(v) != Some(k) {
            let base = ssa_name(v, *k);
            if known(&base, &decls).is_none() {
                return Err(format!("env_out sets '{v}' to {k} but '{base}' is not declared"));
            }
        }
    }
    Ok((decls, asserts))
}

/// JSON object in a model reply, tolerating code fences and surrounding prose.
fn reply_json(text: &str) -> Result<serde_json::Value, String> {
    let start = text.find('{').ok_or("reply contains no JSON object")?;
    let end = text.rfind('}').ok_or("reply contains no JSON object")?;
    if end < start {
        return Err("reply contains no JSON object".into());
    }
    serde_json::from_str(&text[start..=end]).map_err(|e| format!("reply is not valid JSON: {e}"))
}

fn parse_fragment_reply(text: &str) -> Result<(String, BTreeMap<String, u32>), String> {
    let v = reply_json(text)?;
    let fragment = v["fragment"]
        .as_str()
        .ok_or("reply lacks a string field 'fragment'")?
        .to_string();
    let env_out = serde_json::from_value(v["env_out"].clone())
        .map_err(|e| format!("reply has no usable 'env_out' mapping: {e}"))?;
    Ok((fragment, env_out))
}

const PRIOR_TAIL: usize = 5;

/// Asks for the constraints of `chunk`, refining on rejection until
/// `max_refine` attempts have been made.
#[allow(clippy::too_many_arguments)]
pub fn generate_fragment(
    transport: &dyn Transport,
    solver: &SolverConfig,
    chunk: &PathChunk,
    env_in: &BTreeMap<String, u32>,
    prior: &SmtScript,
    examples: &[&Template],
    max_refine: u32,
) -> Result<BridgeOutcome, TransportError> {
    let tail_from = prior.asserts.len().saturating_sub(PRIOR_TAIL);
    let mut request = FragmentRequest {
        chunk: chunk.text(),
        env_in: env_in.clone(),
        prior_tail: prior.asserts[tail_from..].iter().map(|a| format!("(assert {a})")).collect(),
        examples: examples.iter().map(|t| (*t).clone()).collect(),
        attempt: 1,
        feedback: None,
    };
    let limit = max_refine.max(1);
    let mut last_error = String::new();
    for attempt in 1..=limit {
        request.attempt = attempt;
        let reply = transport.complete(&BridgeRequest::Fragment(request.clone()))?;
        let checked = parse_fragment_reply(&reply).and_then(|(text, env_out)| {
            let (decls, asserts) = validate_fragment(&text, env_in, &env_out, prior)?;
            let mut combined = prior.clone();
            for d in &decls {
                combined.declare(d.clone());
            }
            for a in &asserts {
                combined.assert(
                    a.clone(),
                    crate::smt::Origin {
                        step: chunk.offset,
                        synthetic: false,
                    },
                );
            }
            match solve(&combined, solver).verdict {
                SolverVerdict::SolverFailure { stderr, .. } => Err(format!("solver rejected the constraints: {stderr}")),
                _ => Ok(Fragment {
                    text,
                    decls,
                    asserts,
                    env_out,
                    attempts: attempt,
                }),
            }
        });
        match checked {
            Ok(f) => return Ok(BridgeOutcome::Fragment(f)),
            Err(e) => {
                debug!("fragment attempt {attempt} rejected: {e}");
                request.feedback = Some(Feedback {
                    previous: reply,
                    error: e.clone(),
                });
                last_error = e;
            }
        }
    }
    Ok(BridgeOutcome::BridgeFailed {
        reason: last_error,
        attempts: limit,
    })
}

fn parse_solve_reply(text: &str, env: &TypeEnv) -> Result<Option<TestInput>, String> {
    let v = reply_json(text)?;
    match v["sat"].as_bool() {
        Some(false) => return Ok(None),
        Some(true) => {}
        None => return Err("reply lacks a boolean field 'sat'".into()),
    }
    let args = v["args"].as_object().ok_or("reply lacks an 'args' object")?;
    let mut out = Vec::with_capacity(env.params.len());
    for (name, ty) in &env.params {
        let lit = match args.get(name) {
            Some(serde_json::Value::String(s)) => s.clone(),
            Some(other) => other.to_string(),
            None => return Err(format!("no value for parameter '{name}'")),
        };
        let mut vals = parse_args(&lit).map_err(|e| format!("parameter '{name}': {e}"))?;
        if vals.len() != 1 {
            return Err(format!("parameter '{name}': expected one value, got '{lit}'"));
        }
        let v = vals
            .pop()
            .expect("one value")
            .coerce_to(*ty)
            .map_err(|e| format!("parameter '{name}': {e}"))?;
        out.push((name.clone(), v));
    }
    Ok(Some(TestInput { args: out }))
}

fn param_list(env: &TypeEnv) -> Vec<String> {
    env.params.iter().map(|(p, t): &(String, SubsetType)| format!("{p}: {t}")).collect()
}

/// Asks directly for inputs following `path`, re-prompting once on a
/// malformed reply. Proposed inputs are replayed before being reported.
pub fn llm_solve(
    transport: &dyn Transport,
    source: &str,
    f: &FunctionDef,
    env: &TypeEnv,
    path: &ExecutionPath,
) -> Result<BridgeOutcome, TransportError> {
    let mut request = SolveRequest {
        function: f.name.clone(),
        source: source.to_string(),
        path: path.render(),
        params: param_list(env),
        attempt: 1,
        feedback: None,
    };
    let mut reason = String::new();
    for attempt in 1..=2 {
        request.attempt = attempt;
        let reply = transport.complete(&BridgeRequest::Solve(request.clone()))?;
        match parse_solve_reply(&reply, env) {
            Ok(None) => return Ok(BridgeOutcome::FallbackUnsat),
            Ok(Some(input)) => {
                let verdict = path_verdict(f, &input, path);
                return Ok(BridgeOutcome::FallbackInput { input, verdict });
            }
            Err(e) => {
                request.feedback = Some(e.clone());
                reason = e;
            }
        }
    }
    Ok(BridgeOutcome::BridgeFailed { reason, attempts: 2 })
}

/// A configured bridge: knowledge base, transport and the solver used to
/// check fragments.
pub struct Bridge {
    pub config: BridgeConfig,
    pub store: TemplateStore,
    pub solver: SolverConfig,
    transport: Box<dyn Transport>,
}

impl Bridge {
    /// `None` when the mode is Off. `log_dir` receives Live transcripts.
    pub fn from_config(
        config: BridgeConfig,
        solver: SolverConfig,
        log_dir: Option<PathBuf>,
    ) -> Result<Option<Bridge>, TransportError> {
        let transport: Box<dyn Transport> = match &config.mode {
            BridgeMode::Off => return Ok(None),
            BridgeMode::Replay(dir) => Box::new(ReplayTransport::new(dir.clone())),
            BridgeMode::Live => live_transport(&config, log_dir)?,
        };
        Ok(Some(Bridge::with_transport(config, solver, transport)))
    }

    pub fn with_transport(config: BridgeConfig, solver: SolverConfig, transport: Box<dyn Transport>) -> Bridge {
        Bridge {
            config,
            store: TemplateStore::shipped(),
            solver,
            transport,
        }
    }

    pub fn fragment_for(
        &self,
        chunk: &PathChunk,
        env_in: &BTreeMap<String, u32>,
        prior: &SmtScript,
    ) -> Result<BridgeOutcome, TransportError> {
        let examples: Vec<&Template> = self
            .store
            .retrieve(&chunk.text(), self.config.k.max(1))
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        generate_fragment(
            self.transport.as_ref(),
            &self.solver,
            chunk,
            env_in,
            prior,
            &examples,
            self.config.max_refine,
        )
    }

    pub fn solve_directly(
        &self,
        source: &str,
        f: &FunctionDef,
        env: &TypeEnv,
        path: &ExecutionPath,
    ) -> Result<BridgeOutcome, TransportError> {
        llm_solve(self.transport.as_ref(), source, f, env, path)
    }
}

#[cfg(feature = "live")]
fn live_transport(config: &BridgeConfig, log_dir: Option<PathBuf>) -> Result<Box<dyn Transport>, TransportError> {
    let endpoint = config
        .endpoint
        .clone()
        .ok_or_else(|| TransportError::NotConfigured("an endpoint (PATHFORGE_LLM_ENDPOINT)".into()))?;
    let key = std::env::var(&config.api_key_env)
        .map_err(|_| TransportError::NotConfigured(format!("an API key in {}", config.api_key_env)))?;
    Ok(Box::new(LiveTransport::new(
        endpoint,
        config.model.clone(),
        key,
        config.max_in_flight,
        log_dir,
    )))
}

#[cfg(not(feature = "live"))]
fn live_transport(_: &BridgeConfig, _: Option<PathBuf>) -> Result<Box<dyn Transport>, TransportError> {
    Err(TransportError::NotConfigured(
        "a build with the `live` feature".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smt::Origin;

    fn prior() -> SmtScript {
        let mut s = SmtScript::new("f");
        s.declare(Symbol::new("_x_0", Sort::Int));
        s.assert(Term::bin(crate::smt::Op::Gt, Term::sym("_x_0"), Term::Int(0)), Origin { step: 1, synthetic: false });
        s
    }

    fn env(pairs: &[(&str, u32)]) -> BTreeMap<String, u32> {
        pairs.iter().map(|(v, k)| (v.to_string(), *k)).collect()
    }

    #[test]
    fn accepts_well_formed_fragment() {
        let (decls, asserts) = validate_fragment(
            "(declare-const _y_0 Int)\n(assert (= _y_0 (+ _x_0 1)))",
            &env(&[("x", 0)]),
            &env(&[("x", 0), ("y", 0)]),
            &prior(),
        )
        .unwrap();
        assert_eq!(decls, vec![Symbol::new("_y_0", Sort::Int)]);
        assert_eq!(asserts[0].to_string(), "(= _y_0 (+ _x_0 1))");
    }

    #[test]
    fn rejections_name_the_problem() {
        let p = prior();
        let e = env(&[("x", 0)]);
        let err = |text: &str, out: &BTreeMap<String, u32>| validate_fragment(text, &e, out, &p).unwrap_err();
        assert!(err("(assert (bvadd _x_0 1))", &e).contains("unknown operator 'bvadd'"));
        assert!(err("(assert (> _z_0 1))", &e).contains("undeclared symbol '_z_0'"));
        assert!(err("(declare-const _x_0 Real)", &e).contains("redeclared"));
        assert!(err("(push 1)", &e).contains("unsupported command"));
        assert!(err("(assert (> _x_0 1)", &e).contains("syntax error"));
        assert!(err("(assert true)", &env(&[("x", 1)])).contains("'_x_1' is not declared"));
        let lowered = validate_fragment("(assert true)", &env(&[("x", 2)]), &env(&[("x", 1)]), &p).unwrap_err();
        assert!(lowered.contains("lowers"));
    }

    #[test]
    fn reply_json_tolerates_fences() {
        let (frag, out) =
            parse_fragment_reply("```json\n{\"fragment\": \"(assert true)\", \"env_out\": {\"x\": 0}}\n```").unwrap();
        assert_eq!(frag, "(assert true)");
        assert_eq!(out, env(&[("x", 0)]));
        assert!(parse_fragment_reply("no idea").is_err());
    }

    #[test]
    fn request_keys_are_stable_and_distinct() {
        let r = |attempt| {
            BridgeRequest::Solve(SolveRequest {
                function: "f".into(),
                source: "def f(x: int) -> int:\n    return x\n".into(),
                path: String::new(),
                params: vec!["x: int".into()],
                attempt,
                feedback: None,
            })
        };
        assert_eq!(r(1).key(), r(1).key());
        assert_ne!(r(1).key(), r(2).key());
        assert_eq!(r(1).key().len(), 64);
    }
}
