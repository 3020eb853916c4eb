use std::collections::VecDeque;

use thiserror::Error;

use super::{
    Bounds, Cfg, ChunkStrategy, EdgeLabel, ExecutionPath, NodeKind, PathChunk, PathStep, StepKind,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignError {
    #[error("no CFG walk produces the trace (first unmatched position {position})")]
    NoMatch { position: usize },
    #[error("more than one CFG walk produces the trace")]
    Ambiguous,
}

fn step_kind(cfg: &Cfg, node: usize) -> StepKind {
    match cfg.nodes[node].kind {
        NodeKind::Step(k) => k,
        NodeKind::Exit => unreachable!("exit nodes are not steps"),
    }
}

fn make_step(cfg: &Cfg, node: usize, branch: Option<bool>, iteration: Option<u32>) -> PathStep {
    let n = &cfg.nodes[node];
    PathStep {
        line: n.line,
        kind: step_kind(cfg, node),
        text: n.text.clone(),
        branch_taken: branch,
        loop_iteration: iteration,
    }
}

/// Tags a node visit with its loop iteration: the guard's visit count within
/// the current activation of its loop.
fn next_iteration(cfg: &Cfg, counts: &mut [u32], prev: Option<usize>, node: usize) -> Option<u32> {
    if !cfg.nodes[node].loop_guard {
        return None;
    }
    let back = prev
        .and_then(|p| cfg.edge(p, node))
        .is_some_and(|e| e.back);
    counts[node] = if back { counts[node] + 1 } else { 1 };
    Some(counts[node])
}

/// Builds the path for a walk of step nodes (exit excluded). Branches of
/// condition steps come from the following node; `final_branch` supplies the
/// last one when the walk ends at a condition.
pub fn walk_to_path(
    cfg: &Cfg,
    walk: &[usize],
    final_branch: Option<bool>,
    truncated: bool,
) -> ExecutionPath {
    let mut counts = vec![0u32; cfg.nodes.len()];
    let mut steps = Vec::with_capacity(walk.len());
    for (i, &node) in walk.iter().enumerate() {
        let prev = if i == 0 { None } else { Some(walk[i - 1]) };
        let iteration = next_iteration(cfg, &mut counts, prev, node);
        let branch = if step_kind(cfg, node) == StepKind::Condition {
            match walk.get(i + 1) {
                Some(&next) => cfg.edge(node, next).map(|e| e.label == EdgeLabel::TrueBranch),
                None => final_branch,
            }
        } else {
            None
        };
        steps.push(make_step(cfg, node, branch, iteration));
    }
    ExecutionPath {
        function: cfg.function.clone(),
        steps,
        truncated,
    }
}

#[derive(Clone)]
struct State {
    node: usize,
    prev: Option<usize>,
    steps: Vec<PathStep>,
    counts: Vec<u32>,
}

/// Breadth-first enumeration of bounded paths from the entry.
pub fn enumerate_paths(cfg: &Cfg, bounds: &Bounds) -> Vec<ExecutionPath> {
    let mut out = Vec::new();
    if bounds.max_paths == 0 {
        return out;
    }
    let mut queue = VecDeque::from([State {
        node: cfg.entry,
        prev: None,
        steps: Vec::new(),
        counts: vec![0; cfg.nodes.len()],
    }]);
    while let Some(mut st) = queue.pop_front() {
        if st.node == cfg.exit || st.steps.len() >= bounds.max_steps {
            out.push(ExecutionPath {
                function: cfg.function.clone(),
                steps: st.steps,
                truncated: st.node != cfg.exit,
            });
            if out.len() >= bounds.max_paths {
                break;
            }
            continue;
        }
        let iteration = next_iteration(cfg, &mut st.counts, st.prev, st.node);
        if step_kind(cfg, st.node) == StepKind::Condition {
            for (branch, label) in [(true, EdgeLabel::TrueBranch), (false, EdgeLabel::FalseBranch)] {
                if branch && iteration.is_some_and(|c| c > bounds.max_loop_iterations) {
                    continue;
                }
                let Some(edge) = cfg.successor(st.node, label) else {
                    continue;
                };
                let mut steps = st.steps.clone();
                steps.push(make_step(cfg, st.node, Some(branch), iteration));
                queue.push_back(State {
                    node: edge.to,
                    prev: Some(st.node),
                    steps,
                    counts: st.counts.clone(),
                });
            }
        } else {
            let step = make_step(cfg, st.node, None, iteration);
            let Some(edge) = cfg.successor(st.node, EdgeLabel::Fallthrough) else {
                continue;
            };
            let next = edge.to;
            let prev = st.node;
            st.steps.push(step);
            st.node = next;
            st.prev = Some(prev);
            queue.push_back(st);
        }
    }
    out
}

/// Finds the unique CFG walk whose visited lines equal `line_trace`.
///
/// A trace that stops where the CFG cannot reach the exit yields a path with
/// `truncated = true`; if it stops on a condition with no exit edge, that
/// step's `branch_taken` is unknown and left empty.
pub fn align_trace(cfg: &Cfg, line_trace: &[u32]) -> Result<ExecutionPath, AlignError> {
    let n = cfg.nodes.len();
    let len = line_trace.len();
    if len == 0 || cfg.nodes[cfg.entry].line != line_trace[0] {
        return Err(AlignError::NoMatch { position: 0 });
    }
    let step_nodes: Vec<usize> = (0..n).filter(|&i| i != cfg.exit).collect();
    // ways[i][node]: number of ways (capped at 2) to match line_trace[i..]
    // starting at node.
    let mut ways = vec![vec![0u8; n]; len];
    for &node in &step_nodes {
        if cfg.nodes[node].line == line_trace[len - 1] {
            ways[len - 1][node] = 1;
        }
    }
    let mut deepest_unmatched = len - 1;
    for i in (0..len - 1).rev() {
        let mut any = false;
        for &node in &step_nodes {
            if cfg.nodes[node].line != line_trace[i] {
                continue;
            }
            let mut w = 0u8;
            for e in cfg.successors(node) {
                if e.to != cfg.exit {
                    w = w.saturating_add(ways[i + 1][e.to]).min(2);
                }
            }
            ways[i][node] = w;
            any |= w > 0;
        }
        if !any {
            deepest_unmatched = i;
        }
    }
    match ways[0][cfg.entry] {
        0 => {
            // report the first position from which the suffix cannot match
            let position = (0..len)
                .find(|&i| step_nodes.iter().all(|&nd| ways[i][nd] == 0))
                .unwrap_or(deepest_unmatched);
            return Err(AlignError::NoMatch { position });
        }
        1 => {}
        _ => return Err(AlignError::Ambiguous),
    }
    let mut walk = Vec::with_capacity(len);
    let mut node = cfg.entry;
    walk.push(node);
    for i in 1..len {
        node = cfg
            .successors(node)
            .find(|e| e.to != cfg.exit && ways[i][e.to] > 0)
            .map(|e| e.to)
            .expect("counted walk exists");
        walk.push(node);
    }
    let last = *walk.last().unwrap();
    let exit_edge = cfg.successors(last).find(|e| e.to == cfg.exit).copied();
    let truncated = exit_edge.is_none();
    let final_branch = match (step_kind(cfg, last), exit_edge) {
        (StepKind::Condition, Some(e)) => Some(e.label == EdgeLabel::TrueBranch),
        _ => None,
    };
    Ok(walk_to_path(cfg, &walk, final_branch, truncated))
}

pub fn chunk_path(path: &ExecutionPath, strategy: ChunkStrategy) -> Vec<PathChunk> {
    let mut out = Vec::new();
    match strategy {
        ChunkStrategy::ByLine => {
            for (i, s) in path.steps.iter().enumerate() {
                out.push(PathChunk {
                    steps: vec![s.clone()],
                    strategy,
                    offset: i,
                });
            }
        }
        ChunkStrategy::ByCondition => {
            let mut start = 0;
            for (i, s) in path.steps.iter().enumerate() {
                if s.kind == StepKind::Condition {
                    out.push(PathChunk {
                        steps: path.steps[start..=i].to_vec(),
                        strategy,
                        offset: start,
                    });
                    start = i + 1;
                }
            }
            if start < path.steps.len() {
                out.push(PathChunk {
                    steps: path.steps[start..].to_vec(),
                    strategy,
                    offset: start,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::build_cfg;
    use crate::frontend::parse_unit;

    fn cfg_of(src: &str) -> Cfg {
        build_cfg(&parse_unit(src, "t.py").unwrap().functions[0])
    }

    const LOOP: &str = "def f(n: int) -> int:\n    while n > 0:\n        n = n - 1\n    x = 0\n    return n\n";

    #[test]
    fn straight_line_has_one_path() {
        let g = cfg_of("def f(x: int) -> int:\n    y = x + 1\n    return y\n");
        let ps = enumerate_paths(&g, &Bounds::default());
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].steps.len(), 3);
        assert!(!ps[0].truncated);
    }

    #[test]
    fn if_else_has_two_paths() {
        let g = cfg_of("def f(x: int) -> int:\n    if x > 3:\n        y = 1\n    else:\n        y = 2\n    return y\n");
        let ps = enumerate_paths(&g, &Bounds::default());
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].steps[1].branch_taken, Some(true));
        assert_eq!(ps[1].steps[1].branch_taken, Some(false));
    }

    #[test]
    fn while_loop_bounded_at_two_iterations() {
        let g = cfg_of(LOOP);
        let b = Bounds {
            max_loop_iterations: 2,
            ..Bounds::default()
        };
        let ps = enumerate_paths(&g, &b);
        assert_eq!(ps.len(), 3);
        // breadth-first: zero iterations first
        let guard_tags: Vec<Vec<u32>> = ps
            .iter()
            .map(|p| p.steps.iter().filter_map(|s| s.loop_iteration).collect())
            .collect();
        assert_eq!(guard_tags, vec![vec![1], vec![1, 2], vec![1, 2, 3]]);
        for p in &ps {
            let last_guard = p.steps.iter().rev().find(|s| s.loop_iteration.is_some()).unwrap();
            assert_eq!(last_guard.branch_taken, Some(false));
        }
    }

    #[test]
    fn max_steps_truncates() {
        let g = cfg_of(LOOP);
        let b = Bounds {
            max_steps: 4,
            max_loop_iterations: 5,
            max_paths: 100,
        };
        let ps = enumerate_paths(&g, &b);
        assert!(ps.iter().any(|p| p.truncated && p.steps.len() == 4));
        assert!(ps.iter().all(|p| p.steps.len() <= 4));
    }

    #[test]
    fn max_paths_caps_output() {
        let g = cfg_of(LOOP);
        let b = Bounds {
            max_paths: 2,
            ..Bounds::default()
        };
        assert_eq!(enumerate_paths(&g, &b).len(), 2);
    }

    #[test]
    fn align_one_iteration() {
        let g = cfg_of(LOOP);
        let p = align_trace(&g, &[1, 2, 3, 2, 4, 5]).unwrap();
        let guards: Vec<&PathStep> = p.steps.iter().filter(|s| s.line == 2).collect();
        assert_eq!(guards.len(), 2);
        assert_eq!(guards[0].loop_iteration, Some(1));
        assert_eq!(guards[0].branch_taken, Some(true));
        assert_eq!(guards[1].loop_iteration, Some(2));
        assert_eq!(guards[1].branch_taken, Some(false));
        assert!(!p.truncated);
    }

    #[test]
    fn align_unknown_line_fails() {
        let g = cfg_of(LOOP);
        assert!(matches!(
            align_trace(&g, &[1, 2, 9]),
            Err(AlignError::NoMatch { .. })
        ));
    }

    #[test]
    fn aligned_enumerated_paths_round_trip() {
        let g = cfg_of(
            "def f(xs: List[int]) -> int:\n    c = 0\n    for x in xs:\n        if x > 0:\n            c += 1\n    return c\n",
        );
        for p in enumerate_paths(&g, &Bounds::default()) {
            if p.truncated {
                continue;
            }
            assert_eq!(align_trace(&g, &p.lines()).unwrap(), p);
        }
    }

    #[test]
    fn chunking() {
        let g = cfg_of(LOOP);
        let p = align_trace(&g, &[1, 2, 3, 2, 4, 5]).unwrap();
        let by_line = chunk_path(&p, ChunkStrategy::ByLine);
        assert_eq!(by_line.len(), p.steps.len());
        let by_cond = chunk_path(&p, ChunkStrategy::ByCondition);
        let kinds: Vec<Vec<StepKind>> = by_cond
            .iter()
            .map(|c| c.steps.iter().map(|s| s.kind).collect())
            .collect();
        assert_eq!(
            kinds,
            vec![
                vec![StepKind::Enter, StepKind::Condition],
                vec![StepKind::Expression, StepKind::Condition],
                vec![StepKind::Expression, StepKind::Expression],
            ]
        );
        let joined: Vec<PathStep> = by_cond.into_iter().flat_map(|c| c.steps).collect();
        assert_eq!(joined, p.steps);
    }

    #[test]
    fn rendering_format() {
        let g = cfg_of(LOOP);
        let p = align_trace(&g, &[1, 2, 3, 2, 4, 5]).unwrap();
        let text = p.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "1\tenter\tdef f(n: int)");
        assert_eq!(lines[1], "2\tcondition\tn > 0 @iter=1 ->taken");
        assert_eq!(lines[2], "3\texpression\tn = n - 1");
        assert_eq!(lines[3], "2\tcondition\tn > 0 @iter=2 ->not-taken");
    }
}
