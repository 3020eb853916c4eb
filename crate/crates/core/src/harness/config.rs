//! Harness configuration: defaults, an optional TOML file, then flags.
//!
//! Config file keys (all optional):
//!
//! ```toml
//! [bounds]
//! max_steps = 20
//! max_loop_iterations = 3
//! max_paths = 256
//!
//! [solver]
//! command = "z3"          # executable and arguments, split on whitespace
//! timeout_secs = 10.0
//! logic = "ALL"
//!
//! [bridge]
//! mode = "off"            # off | replay | live
//! fixtures = "fixtures/"  # replay directory
//! endpoint = "https://..."
//! model = "gpt-4o-mini"
//! api_key_env = "PATHFORGE_LLM_KEY"
//! k = 2
//! max_refine = 3
//! chunking = "line"       # line | condition
//! max_in_flight = 4
//!
//! [run]
//! corpus = "corpus/"
//! out = "pathforge-out"
//! jobs = 4
//! keep_smt = false
//! all_paths = false
//! ```
//!
//! Relative paths in the file resolve against the file's directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use crate::bridge::{BridgeConfig, BridgeMode};
use crate::cfg::{Bounds, ChunkStrategy};
use crate::smt::SolverConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessConfig {
    pub bounds: Bounds,
    pub solver: SolverConfig,
    pub bridge: BridgeConfig,
    pub corpus_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub keep_smt: bool,
    /// Bench every enumerated path instead of only the example traces.
    pub all_paths: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            bounds: Bounds::default(),
            solver: SolverConfig::default(),
            bridge: BridgeConfig::default(),
            corpus_dir: None,
            out_dir: PathBuf::from("pathforge-out"),
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            keep_smt: false,
            all_paths: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("{0}")]
    Value(String),
    #[error("{what} does not exist: {path}")]
    MissingPath { what: &'static str, path: PathBuf },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    bounds: FileBounds,
    #[serde(default)]
    solver: FileSolver,
    #[serde(default)]
    bridge: FileBridge,
    #[serde(default)]
    run: FileRun,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileBounds {
    max_steps: Option<usize>,
    max_loop_iterations: Option<u32>,
    max_paths: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSolver {
    command: Option<String>,
    timeout_secs: Option<f64>,
    logic: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileBridge {
    mode: Option<String>,
    fixtures: Option<PathBuf>,
    endpoint: Option<String>,
    model: Option<String>,
    api_key_env: Option<String>,
    k: Option<usize>,
    max_refine: Option<u32>,
    chunking: Option<String>,
    max_in_flight: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRun {
    corpus: Option<PathBuf>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    keep_smt: Option<bool>,
    all_paths: Option<bool>,
}

pub fn parse_chunking(s: &str) -> Result<ChunkStrategy, ConfigError> {
    match s {
        "line" => Ok(ChunkStrategy::ByLine),
        "condition" => Ok(ChunkStrategy::ByCondition),
        _ => Err(ConfigError::Value(format!("chunking must be 'line' or 'condition', not '{s}'"))),
    }
}

/// `off`, `live`, or `replay` with its fixture directory.
pub fn parse_mode(s: &str, fixtures: Option<&Path>) -> Result<BridgeMode, ConfigError> {
    match s {
        "off" => Ok(BridgeMode::Off),
        "live" => Ok(BridgeMode::Live),
        "replay" => fixtures
            .map(|d| BridgeMode::Replay(d.to_path_buf()))
            .ok_or_else(|| ConfigError::Value("replay mode needs a fixture directory".into())),
        _ => Err(ConfigError::Value(format!("bridge mode must be off, replay or live, not '{s}'"))),
    }
}

fn timeout(secs: f64) -> Result<Duration, ConfigError> {
    Duration::try_from_secs_f64(secs).map_err(|e| ConfigError::Value(format!("bad timeout {secs}: {e}")))
}

impl HarnessConfig {
    /// Defaults overlaid with the TOML file at `path`.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let file: FileConfig = toml::from_str(&text).map_err(|e| ConfigError::Invalid {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rel = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let mut cfg = HarnessConfig::default();
        let b = file.bounds;
        cfg.bounds.max_steps = b.max_steps.unwrap_or(cfg.bounds.max_steps);
        cfg.bounds.max_loop_iterations = b.max_loop_iterations.unwrap_or(cfg.bounds.max_loop_iterations);
        cfg.bounds.max_paths = b.max_paths.unwrap_or(cfg.bounds.max_paths);
        let s = file.solver;
        if let Some(c) = s.command {
            cfg.solver.command = SolverConfig::from_command_line(&c).command;
        }
        if let Some(t) = s.timeout_secs {
            cfg.solver.timeout = timeout(t)?;
        }
        if let Some(l) = s.logic {
            cfg.solver.logic = l;
        }
        let br = file.bridge;
        let fixtures = br.fixtures.map(rel);
        if let Some(m) = br.mode {
            cfg.bridge.mode = parse_mode(&m, fixtures.as_deref())?;
        }
        if br.endpoint.is_some() {
            cfg.bridge.endpoint = br.endpoint;
        }
        if let Some(m) = br.model {
            cfg.bridge.model = m;
        }
        if let Some(k) = br.api_key_env {
            cfg.bridge.api_key_env = k;
        }
        cfg.bridge.k = br.k.unwrap_or(cfg.bridge.k);
        cfg.bridge.max_refine = br.max_refine.unwrap_or(cfg.bridge.max_refine);
        if let Some(c) = br.chunking {
            cfg.bridge.chunking = parse_chunking(&c)?;
        }
        cfg.bridge.max_in_flight = br.max_in_flight.unwrap_or(cfg.bridge.max_in_flight);
        let r = file.run;
        cfg.corpus_dir = r.corpus.map(rel);
        if let Some(o) = r.out {
            cfg.out_dir = rel(o);
        }
        cfg.jobs = r.jobs.unwrap_or(cfg.jobs);
        cfg.keep_smt = r.keep_smt.unwrap_or(cfg.keep_smt);
        cfg.all_paths = r.all_paths.unwrap_or(cfg.all_paths);
        Ok(cfg)
    }

    /// Checks value ranges and that referenced inputs exist.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.bridge.k == 0 {
            return Err(ConfigError::Value("templates k must be at least 1".into()));
        }
        if self.jobs == 0 {
            return Err(ConfigError::Value("jobs must be at least 1".into()));
        }
        if self.solver.command.is_empty() {
            return Err(ConfigError::Value("solver command is empty".into()));
        }
        if let Some(c) = &self.corpus_dir {
            if !c.is_dir() {
                return Err(ConfigError::MissingPath {
                    what: "corpus directory",
                    path: c.clone(),
                });
            }
        }
        if let BridgeMode::Replay(d) = &self.bridge.mode {
            if !d.is_dir() {
                return Err(ConfigError::MissingPath {
                    what: "replay fixture directory",
                    path: d.clone(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pf.toml");
        fs::write(
            &path,
            "[bounds]\nmax_steps = 12\n[solver]\ncommand = \"z3 -smt2\"\ntimeout_secs = 2.5\n[bridge]\nmode = \"replay\"\nfixtures = \"fx\"\nchunking = \"condition\"\n[run]\nout = \"o\"\njobs = 3\n",
        )
        .unwrap();
        let cfg = HarnessConfig::from_file(&path).unwrap();
        assert_eq!(cfg.bounds.max_steps, 12);
        assert_eq!(cfg.bounds.max_loop_iterations, 3);
        assert_eq!(cfg.solver.command, vec!["z3", "-smt2"]);
        assert_eq!(cfg.solver.timeout, Duration::from_millis(2500));
        assert_eq!(cfg.bridge.mode, BridgeMode::Replay(dir.path().join("fx")));
        assert_eq!(cfg.bridge.chunking, ChunkStrategy::ByCondition);
        assert_eq!(cfg.out_dir, dir.path().join("o"));
        assert_eq!(cfg.jobs, 3);
        assert!(matches!(cfg.validate(), Err(ConfigError::MissingPath { .. })));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pf.toml");
        fs::write(&path, "[bounds]\nmax_stepz = 1\n").unwrap();
        assert!(matches!(HarnessConfig::from_file(&path), Err(ConfigError::Invalid { .. })));
    }
}
