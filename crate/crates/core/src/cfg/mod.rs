//! Control-flow graphs over the lowered statement form, and the execution
//! paths walked through them.
//!
//! Loops lower to guard nodes with back edges:
//!
//! * `for v in range(a, b, s)` becomes `v = a`, guard `v < b` (`v > b` for a
//!   negative literal step) and a latch `v = v + s` closing the body.
//! * `for x in lst` becomes `_idx_x = 0`, guard `_idx_x < len(lst)`, a bind
//!   `x = lst[_idx_x]` opening the body and a latch `_idx_x = _idx_x + 1`.
//!
//! All synthesized nodes carry the line of the `for` header.

mod build;
mod paths;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::frontend::{Expr, Param, Stmt};

pub use build::build_cfg;
pub use paths::{align_trace, chunk_path, enumerate_paths, walk_to_path, AlignError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Enter,
    Condition,
    Expression,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Enter => "enter",
            StepKind::Condition => "condition",
            StepKind::Expression => "expression",
        }
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Step(StepKind),
    Exit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeOp {
    Enter,
    /// Guard of an `if`, `while` or lowered `for`.
    Cond(Expr),
    /// Assign, Append, pop statement, Return, Break, Continue or Opaque.
    Simple(Stmt),
    Exit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfgNode {
    pub id: usize,
    pub line: u32,
    pub kind: NodeKind,
    pub text: String,
    pub op: NodeOp,
    /// Set on guards of loops; their steps carry iteration tags.
    pub loop_guard: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeLabel {
    TrueBranch,
    FalseBranch,
    Fallthrough,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CfgEdge {
    pub from: usize,
    pub to: usize,
    pub label: EdgeLabel,
    /// Edge closing a loop iteration (into a guard from inside its loop).
    pub back: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cfg {
    pub function: String,
    pub params: Vec<Param>,
    pub nodes: Vec<CfgNode>,
    pub edges: Vec<CfgEdge>,
    pub entry: usize,
    pub exit: usize,
}

impl Cfg {
    pub fn successors(&self, node: usize) -> impl Iterator<Item = &CfgEdge> {
        self.edges.iter().filter(move |e| e.from == node)
    }

    pub fn successor(&self, node: usize, label: EdgeLabel) -> Option<&CfgEdge> {
        self.successors(node).find(|e| e.label == label)
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<&CfgEdge> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }

    pub fn exits(&self) -> Vec<usize> {
        vec![self.exit]
    }

    /// Human-readable node and edge listing.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let kind = match n.kind {
                NodeKind::Step(k) => k.as_str(),
                NodeKind::Exit => "exit",
            };
            if n.kind == NodeKind::Exit {
                out.push_str(&format!("n{}\t{}\n", n.id, kind));
            } else {
                out.push_str(&format!("n{}\t{}\tline {}\t{}\n", n.id, kind, n.line, n.text));
            }
        }
        for e in &self.edges {
            let label = match e.label {
                EdgeLabel::TrueBranch => "true",
                EdgeLabel::FalseBranch => "false",
                EdgeLabel::Fallthrough => "next",
            };
            let back = if e.back { " (back)" } else { "" };
            out.push_str(&format!("n{} -> n{}\t{}{}\n", e.from, e.to, label, back));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathStep {
    pub line: u32,
    pub kind: StepKind,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_taken: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loop_iteration: Option<u32>,
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.line, self.kind, self.text)?;
        if let Some(n) = self.loop_iteration {
            write!(f, " @iter={n}")?;
        }
        match self.branch_taken {
            Some(true) => f.write_str(" ->taken"),
            Some(false) => f.write_str(" ->not-taken"),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExecutionPath {
    pub function: String,
    pub steps: Vec<PathStep>,
    pub truncated: bool,
}

impl ExecutionPath {
    /// One step per line in the `<line>\t<kind>\t<stmt>` format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }

    pub fn lines(&self) -> Vec<u32> {
        self.steps.iter().map(|s| s.line).collect()
    }

    /// First `n` steps; marks the result truncated when steps were dropped.
    pub fn truncate(&self, n: usize) -> ExecutionPath {
        if self.steps.len() <= n {
            return self.clone();
        }
        ExecutionPath {
            function: self.function.clone(),
            steps: self.steps[..n].to_vec(),
            truncated: true,
        }
    }

    /// True when `trace` follows this path: equal steps, or for a truncated
    /// path, `trace` starts with these steps.
    pub fn is_followed_by(&self, trace: &ExecutionPath) -> bool {
        if self.truncated {
            trace.steps.len() >= self.steps.len() && trace.steps[..self.steps.len()] == self.steps[..]
        } else {
            !trace.truncated && trace.steps == self.steps
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub max_steps: usize,
    pub max_loop_iterations: u32,
    pub max_paths: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            max_steps: 20,
            max_loop_iterations: 3,
            max_paths: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChunkStrategy {
    ByLine,
    ByCondition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathChunk {
    pub steps: Vec<PathStep>,
    pub strategy: ChunkStrategy,
    /// Index of the chunk's first step within its path.
    pub offset: usize,
}

impl PathChunk {
    pub fn text(&self) -> String {
        self.steps
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }
}
