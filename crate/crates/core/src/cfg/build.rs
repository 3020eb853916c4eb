use std::collections::VecDeque;

use crate::frontend::pretty;
use crate::frontend::{
    BinOp, CmpOp, Expr, ExprKind, FunctionDef, LValue, Stmt, StmtKind, HIDDEN_PREFIX,
};

use super::{Cfg, CfgEdge, CfgNode, EdgeLabel, NodeKind, NodeOp, StepKind};

/// Pending edge out of an already-built node.
type Dangling = (usize, EdgeLabel);

struct LoopCx {
    continue_target: usize,
    continue_is_back: bool,
    breaks: Vec<usize>,
}

struct Builder {
    nodes: Vec<CfgNode>,
    edges: Vec<CfgEdge>,
    loops: Vec<LoopCx>,
    exit: usize,
}

pub fn build_cfg(f: &FunctionDef) -> Cfg {
    let mut b = Builder {
        nodes: Vec::new(),
        edges: Vec::new(),
        loops: Vec::new(),
        exit: 0,
    };
    b.exit = b.push(0, NodeKind::Exit, String::new(), NodeOp::Exit, false);
    let entry = b.push(
        f.span.line,
        NodeKind::Step(StepKind::Enter),
        pretty::signature(f),
        NodeOp::Enter,
        false,
    );
    let tail = b.block(&f.body, vec![(entry, EdgeLabel::Fallthrough)]);
    let exit = b.exit;
    b.connect(&tail, exit, false);
    b.finish(f, entry)
}

impl Builder {
    fn push(&mut self, line: u32, kind: NodeKind, text: String, op: NodeOp, loop_guard: bool) -> usize {
        let id = self.nodes.len();
        self.nodes.push(CfgNode {
            id,
            line,
            kind,
            text,
            op,
            loop_guard,
        });
        id
    }

    fn connect(&mut self, from: &[Dangling], to: usize, back: bool) {
        for &(f, label) in from {
            self.edges.push(CfgEdge {
                from: f,
                to,
                label,
                back,
            });
        }
    }

    fn simple(&mut self, line: u32, stmt: Stmt, preds: &[Dangling]) -> usize {
        let text = pretty::simple_stmt(&stmt);
        let id = self.push(
            line,
            NodeKind::Step(StepKind::Expression),
            text,
            NodeOp::Simple(stmt),
            false,
        );
        self.connect(preds, id, false);
        id
    }

    fn cond(&mut self, line: u32, e: Expr, preds: &[Dangling], loop_guard: bool) -> usize {
        let text = pretty::expr(&e);
        let id = self.push(
            line,
            NodeKind::Step(StepKind::Condition),
            text,
            NodeOp::Cond(e),
            loop_guard,
        );
        self.connect(preds, id, false);
        id
    }

    fn block(&mut self, body: &[Stmt], mut preds: Vec<Dangling>) -> Vec<Dangling> {
        for s in body {
            preds = self.stmt(s, preds);
        }
        preds
    }

    fn stmt(&mut self, s: &Stmt, preds: Vec<Dangling>) -> Vec<Dangling> {
        let line = s.span.line;
        match &s.kind {
            StmtKind::AugAssign { target, op, value } => {
                let current = match target {
                    LValue::Name(n) => Expr::new(ExprKind::Name(n.clone()), s.span),
                    LValue::Index { base, index } => Expr::new(
                        ExprKind::Subscript {
                            base: Box::new(Expr::new(ExprKind::Name(base.clone()), s.span)),
                            index: Box::new(index.clone()),
                        },
                        s.span,
                    ),
                };
                let lowered = Stmt {
                    kind: StmtKind::Assign {
                        target: target.clone(),
                        value: Expr::new(
                            ExprKind::Binary(*op, Box::new(current), Box::new(value.clone())),
                            value.span,
                        ),
                    },
                    span: s.span,
                };
                let id = self.simple(line, lowered, &preds);
                vec![(id, EdgeLabel::Fallthrough)]
            }
            StmtKind::Assign { .. }
            | StmtKind::Append { .. }
            | StmtKind::ExprStmt(_)
            | StmtKind::Opaque { .. } => {
                let id = self.simple(line, s.clone(), &preds);
                vec![(id, EdgeLabel::Fallthrough)]
            }
            StmtKind::Return(_) => {
                let id = self.simple(line, s.clone(), &preds);
                let exit = self.exit;
                self.connect(&[(id, EdgeLabel::Fallthrough)], exit, false);
                vec![]
            }
            StmtKind::Break => {
                let id = self.simple(line, s.clone(), &preds);
                if let Some(l) = self.loops.last_mut() {
                    l.breaks.push(id);
                }
                vec![]
            }
            StmtKind::Continue => {
                let id = self.simple(line, s.clone(), &preds);
                if let Some(l) = self.loops.last() {
                    let (target, back) = (l.continue_target, l.continue_is_back);
                    self.connect(&[(id, EdgeLabel::Fallthrough)], target, back);
                }
                vec![]
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                let c = self.cond(line, cond.clone(), &preds, false);
                let mut out = self.block(then_body, vec![(c, EdgeLabel::TrueBranch)]);
                out.extend(self.block(else_body, vec![(c, EdgeLabel::FalseBranch)]));
                out
            }
            StmtKind::While { cond, body } => {
                let g = self.cond(line, cond.clone(), &preds, true);
                self.loops.push(LoopCx {
                    continue_target: g,
                    continue_is_back: true,
                    breaks: Vec::new(),
                });
                let tail = self.block(body, vec![(g, EdgeLabel::TrueBranch)]);
                self.connect(&tail, g, true);
                let l = self.loops.pop().unwrap();
                let mut out = vec![(g, EdgeLabel::FalseBranch)];
                out.extend(l.breaks.into_iter().map(|b| (b, EdgeLabel::Fallthrough)));
                out
            }
            StmtKind::ForRange {
                var,
                start,
                stop,
                step,
                body,
            } => {
                let init = assign(var, start.clone(), s);
                let init = self.simple(line, init, &preds);
                let negative = matches!(step.kind, ExprKind::Int(k) if k < 0);
                let guard = Expr::new(
                    ExprKind::Compare(
                        if negative { CmpOp::Gt } else { CmpOp::Lt },
                        Box::new(name(var, s)),
                        Box::new(stop.clone()),
                    ),
                    s.span,
                );
                let g = self.cond(line, guard, &[(init, EdgeLabel::Fallthrough)], true);
                let latch_value = match step.kind {
                    ExprKind::Int(k) if k < 0 => Expr::new(
                        ExprKind::Binary(
                            BinOp::Sub,
                            Box::new(name(var, s)),
                            Box::new(Expr::new(ExprKind::Int(k.unsigned_abs() as i64), step.span)),
                        ),
                        s.span,
                    ),
                    _ => Expr::new(
                        ExprKind::Binary(BinOp::Add, Box::new(name(var, s)), Box::new(step.clone())),
                        s.span,
                    ),
                };
                // The latch is created before the body so `continue` can target it.
                let latch_stmt = assign(var, latch_value, s);
                let latch_text = pretty::simple_stmt(&latch_stmt);
                let latch = self.push(
                    line,
                    NodeKind::Step(StepKind::Expression),
                    latch_text,
                    NodeOp::Simple(latch_stmt),
                    false,
                );
                self.loops.push(LoopCx {
                    continue_target: latch,
                    continue_is_back: false,
                    breaks: Vec::new(),
                });
                let tail = self.block(body, vec![(g, EdgeLabel::TrueBranch)]);
                self.connect(&tail, latch, false);
                self.connect(&[(latch, EdgeLabel::Fallthrough)], g, true);
                let l = self.loops.pop().unwrap();
                let mut out = vec![(g, EdgeLabel::FalseBranch)];
                out.extend(l.breaks.into_iter().map(|b| (b, EdgeLabel::Fallthrough)));
                out
            }
            StmtKind::ForEach {
                var,
                iterable,
                body,
            } => {
                let idx = format!("{HIDDEN_PREFIX}{var}");
                let init = self.simple(line, assign(&idx, Expr::new(ExprKind::Int(0), s.span), s), &preds);
                let guard = Expr::new(
                    ExprKind::Compare(
                        CmpOp::Lt,
                        Box::new(name(&idx, s)),
                        Box::new(Expr::new(ExprKind::Len(Box::new(iterable.clone())), s.span)),
                    ),
                    s.span,
                );
                let g = self.cond(line, guard, &[(init, EdgeLabel::Fallthrough)], true);
                let bind_value = Expr::new(
                    ExprKind::Subscript {
                        base: Box::new(iterable.clone()),
                        index: Box::new(name(&idx, s)),
                    },
                    s.span,
                );
                let bind = self.simple(line, assign(var, bind_value, s), &[(g, EdgeLabel::TrueBranch)]);
                let latch_stmt = assign(
                    &idx,
                    Expr::new(
                        ExprKind::Binary(
                            BinOp::Add,
                            Box::new(name(&idx, s)),
                            Box::new(Expr::new(ExprKind::Int(1), s.span)),
                        ),
                        s.span,
                    ),
                    s,
                );
                let latch_text = pretty::simple_stmt(&latch_stmt);
                let latch = self.push(
                    line,
                    NodeKind::Step(StepKind::Expression),
                    latch_text,
                    NodeOp::Simple(latch_stmt),
                    false,
                );
                self.loops.push(LoopCx {
                    continue_target: latch,
                    continue_is_back: false,
                    breaks: Vec::new(),
                });
                let tail = self.block(body, vec![(bind, EdgeLabel::Fallthrough)]);
                self.connect(&tail, latch, false);
                self.connect(&[(latch, EdgeLabel::Fallthrough)], g, true);
                let l = self.loops.pop().unwrap();
                let mut out = vec![(g, EdgeLabel::FalseBranch)];
                out.extend(l.breaks.into_iter().map(|b| (b, EdgeLabel::Fallthrough)));
                out
            }
        }
    }

    /// Drops nodes unreachable from the entry and renumbers the rest in
    /// breadth-first order; the exit node is always kept last.
    fn finish(self, f: &FunctionDef, entry: usize) -> Cfg {
        let n = self.nodes.len();
        let mut order = Vec::new();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([entry]);
        seen[entry] = true;
        while let Some(x) = queue.pop_front() {
            if x != self.exit {
                order.push(x);
            }
            // deterministic: true branch before false before fallthrough
            let mut succ: Vec<&CfgEdge> = self.edges.iter().filter(|e| e.from == x).collect();
            succ.sort_by_key(|e| (label_rank(e.label), e.to));
            for e in succ {
                if !seen[e.to] {
                    seen[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        order.push(self.exit);
        let mut remap = vec![usize::MAX; n];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let nodes = order
            .iter()
            .enumerate()
            .map(|(new, &old)| {
                let mut node = self.nodes[old].clone();
                node.id = new;
                if node.kind == NodeKind::Exit {
                    node.line = 0;
                }
                node
            })
            .collect();
        let mut edges: Vec<CfgEdge> = self
            .edges
            .iter()
            .filter(|e| remap[e.from] != usize::MAX && remap[e.to] != usize::MAX)
            .map(|e| CfgEdge {
                from: remap[e.from],
                to: remap[e.to],
                label: e.label,
                back: e.back,
            })
            .collect();
        edges.sort_by_key(|e| (e.from, label_rank(e.label), e.to));
        Cfg {
            function: f.name.clone(),
            params: f.params.clone(),
            nodes,
            edges,
            entry: remap[entry],
            exit: remap[self.exit],
        }
    }
}

fn label_rank(l: EdgeLabel) -> u8 {
    match l {
        EdgeLabel::TrueBranch => 0,
        EdgeLabel::FalseBranch => 1,
        EdgeLabel::Fallthrough => 2,
    }
}

fn name(n: &str, s: &Stmt) -> Expr {
    Expr::new(ExprKind::Name(n.to_string()), s.span)
}

fn assign(var: &str, value: Expr, s: &Stmt) -> Stmt {
    Stmt {
        kind: StmtKind::Assign {
            target: LValue::Name(var.to_string()),
            value,
        },
        span: s.span,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_unit;

    fn cfg_of(src: &str) -> Cfg {
        let u = parse_unit(src, "t.py").unwrap();
        build_cfg(&u.functions[0])
    }

    #[test]
    fn single_return_has_three_nodes() {
        let g = cfg_of("def f() -> int:\n    return 0\n");
        assert_eq!(g.nodes.len(), 3);
        assert_eq!(g.nodes[g.entry].kind, NodeKind::Step(StepKind::Enter));
        assert_eq!(g.nodes[1].kind, NodeKind::Step(StepKind::Expression));
        assert_eq!(g.nodes[g.exit].kind, NodeKind::Exit);
    }

    #[test]
    fn if_else_branches_join() {
        let g = cfg_of("def f(c: bool) -> int:\n    if c:\n        x = 1\n    else:\n        x = 2\n    return x\n");
        let c = g
            .nodes
            .iter()
            .find(|n| n.kind == NodeKind::Step(StepKind::Condition))
            .unwrap();
        let t = g.successor(c.id, EdgeLabel::TrueBranch).unwrap().to;
        let e = g.successor(c.id, EdgeLabel::FalseBranch).unwrap().to;
        assert_eq!(g.nodes[t].text, "x = 1");
        assert_eq!(g.nodes[e].text, "x = 2");
        let jt = g.successor(t, EdgeLabel::Fallthrough).unwrap().to;
        let je = g.successor(e, EdgeLabel::Fallthrough).unwrap().to;
        assert_eq!(jt, je);
        assert_eq!(g.nodes[jt].text, "return x");
    }

    #[test]
    fn one_loop_has_one_guard_and_a_back_edge() {
        let g = cfg_of("def f(n: int) -> int:\n    i = 0\n    while i < n:\n        i = i + 1\n    return i\n");
        let conds: Vec<_> = g
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Step(StepKind::Condition))
            .collect();
        assert_eq!(conds.len(), 1);
        assert!(conds[0].loop_guard);
        assert_eq!(g.edges.iter().filter(|e| e.back).count(), 1);
    }

    #[test]
    fn for_each_lowering() {
        let g = cfg_of("def f(nums: List[int]) -> int:\n    s = 0\n    for num in nums:\n        s += num\n    return s\n");
        let texts: Vec<&str> = g.nodes.iter().map(|n| n.text.as_str()).collect();
        assert!(texts.contains(&"_idx_num = 0"));
        assert!(texts.contains(&"_idx_num < len(nums)"));
        assert!(texts.contains(&"num = nums[_idx_num]"));
        assert!(texts.contains(&"s = s + num"));
        assert!(texts.contains(&"_idx_num = _idx_num + 1"));
    }

    #[test]
    fn negative_step_range() {
        let g = cfg_of("def f(n: int) -> int:\n    s = 0\n    for i in range(n, 0, -2):\n        s += i\n    return s\n");
        let texts: Vec<&str> = g.nodes.iter().map(|n| n.text.as_str()).collect();
        assert!(texts.contains(&"i > 0"));
        assert!(texts.contains(&"i = i - 2"));
    }

    #[test]
    fn unreachable_code_is_pruned() {
        let g = cfg_of("def f() -> int:\n    return 0\n    x = 1\n");
        assert_eq!(g.nodes.len(), 3);
    }

    #[test]
    fn break_and_continue_edges() {
        let g = cfg_of(
            "def f(n: int) -> int:\n    i = 0\n    while i < n:\n        i += 1\n        if i == 3:\n            break\n        if i == 1:\n            continue\n    return i\n",
        );
        let brk = g.nodes.iter().find(|n| n.text == "break").unwrap();
        let to = g.successor(brk.id, EdgeLabel::Fallthrough).unwrap().to;
        assert_eq!(g.nodes[to].text, "return i");
        let cont = g.nodes.iter().find(|n| n.text == "continue").unwrap();
        let e = g.successor(cont.id, EdgeLabel::Fallthrough).unwrap();
        assert_eq!(g.nodes[e.to].text, "i < n");
        assert!(e.back);
    }

    #[test]
    fn every_condition_has_both_branches() {
        let g = cfg_of(
            "def f(xs: List[int]) -> int:\n    c = 0\n    for x in xs:\n        if x > 0:\n            c += 1\n    for i in range(3):\n        c -= i\n    return c\n",
        );
        for n in &g.nodes {
            if n.kind == NodeKind::Step(StepKind::Condition) {
                assert!(g.successor(n.id, EdgeLabel::TrueBranch).is_some());
                assert!(g.successor(n.id, EdgeLabel::FalseBranch).is_some());
            }
        }
    }
}
