#![allow(dead_code)]

use std::path::PathBuf;

use pathforge::bridge::{BridgeConfig, BridgeMode};
use pathforge::cfg::{build_cfg, enumerate_paths, Bounds, ExecutionPath};
use pathforge::frontend::{parse_unit_lenient, FunctionDef};
use pathforge::smt::{SmtScript, SolverConfig};
use pathforge::translator::{translate_step, SsaEnv};
use pathforge::typing::{infer_types, TypeEnv};

/// Appending through an alias: the rules refuse, the interpreter copes.
pub const ALIAS_APPEND: &str = "\
def aliasAppend(nums: list[int]) -> int:
    other = nums
    other.append(1)
    if len(nums) > 2:
        return 1
    return 0
";

pub const ALIAS_WRITE: &str = "\
def aliasWrite(nums: list[int]) -> int:
    other = nums
    if len(other) > 0:
        other[0] = 5
        if nums[0] == 5:
            return 1
    return 0
";

pub const CLAMP: &str = "\
def clampLow(x: int) -> int:
    y = max(x, 3)
    if y > 5:
        return 1
    return 0
";

pub const TWO_BRANCH: &str = "\
def classify(x: int) -> int:
    if x > 3:
        return 1
    return 0
";

pub const NARROW: &str = "\
def narrow(x: int) -> int:
    if x > 3:
        if x < 2:
            return 2
        return 1
    return 0
";

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn corpus_dir() -> PathBuf {
    manifest_dir().join("corpus")
}

pub fn fixture_dir() -> PathBuf {
    manifest_dir().join("tests/fixtures/bridge")
}

pub fn solver() -> SolverConfig {
    SolverConfig::default()
}

pub fn replay_config() -> BridgeConfig {
    BridgeConfig {
        mode: BridgeMode::Replay(fixture_dir()),
        ..BridgeConfig::default()
    }
}

pub fn function(src: &str) -> (FunctionDef, TypeEnv) {
    let f = parse_unit_lenient(src, "inline.py").unwrap().functions.remove(0);
    let env = infer_types(&f).unwrap();
    (f, env)
}

pub fn paths(f: &FunctionDef) -> Vec<ExecutionPath> {
    enumerate_paths(&build_cfg(f), &Bounds::default())
}

/// SSA state and script after translating the first `upto` steps by rules.
pub fn prefix_state(env: &TypeEnv, path: &ExecutionPath, upto: usize) -> (SsaEnv, SmtScript) {
    let mut state = SsaEnv::new(env.clone());
    let mut script = SmtScript::new(&path.function);
    for (i, s) in path.steps[..upto].iter().enumerate() {
        translate_step(&mut state, &mut script, i, s).unwrap();
    }
    (state, script)
}
