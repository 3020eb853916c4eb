use crate::cfg::{PathStep, StepKind};
use crate::frontend::{parse_expr, parse_stmt, BinOp, CmpOp, Expr, ExprKind, LValue, StmtKind, UnaryOp};
use crate::smt::{parse_decimal, Op, Origin, SmtScript, Sort, Term, VarSymbols};
use crate::typing::ScalarType;

use super::{current_symbol, enter_step, SsaEnv, Unsupported};

/// A translated expression.
enum TVal {
    Scalar(Term, ScalarType),
    List,
}

#[derive(Clone)]
struct ListRef {
    var: String,
    arr: Term,
    len: Term,
}

struct Cx<'a> {
    st: &'a mut SsaEnv,
    script: &'a mut SmtScript,
    step: usize,
    /// Conditions under which the operand being translated is evaluated.
    guards: Vec<Term>,
}

type R<T> = Result<T, String>;

/// Translates one step, appending declarations and assertions to `script`.
pub fn translate_step(
    state: &mut SsaEnv,
    script: &mut SmtScript,
    index: usize,
    step: &PathStep,
) -> Result<(), Unsupported> {
    let unsupported = |construct: String| Unsupported {
        step: index,
        construct,
    };
    match step.kind {
        StepKind::Enter => enter_step(state, script, index, step),
        StepKind::Condition => {
            let e = parse_expr(&step.text).map_err(|_| unsupported(format!("unparseable condition `{}`", step.text)))?;
            let mut cx = Cx {
                st: state,
                script,
                step: index,
                guards: Vec::new(),
            };
            let t = cx.bool_expr(&e).map_err(unsupported)?;
            match step.branch_taken {
                Some(true) => cx.main(t),
                Some(false) => cx.main(Term::not(t)),
                None => {}
            }
            Ok(())
        }
        StepKind::Expression => {
            let s = parse_stmt(&step.text).map_err(|_| unsupported(format!("unparseable statement `{}`", step.text)))?;
            let mut cx = Cx {
                st: state,
                script,
                step: index,
                guards: Vec::new(),
            };
            cx.stmt(&s.kind).map_err(unsupported)
        }
    }
}

fn list_syms(v: VarSymbols) -> Option<(Term, Term)> {
    match v {
        VarSymbols::List { array, len } => Some((Term::Sym(array.name), Term::Sym(len.name))),
        VarSymbols::Scalar(_) => None,
    }
}

fn is_real(t: ScalarType) -> bool {
    t == ScalarType::Float
}

impl Cx<'_> {
    fn origin(&self, synthetic: bool) -> Origin {
        Origin {
            step: self.step,
            synthetic,
        }
    }

    fn main(&mut self, t: Term) {
        let o = self.origin(false);
        self.script.assert(t, o);
    }

    /// Side constraint, guarded by the short-circuit context.
    fn side(&mut self, t: Term) {
        let t = if self.guards.is_empty() {
            t
        } else {
            Term::implies(Term::and(self.guards.clone()), t)
        };
        let o = self.origin(true);
        self.script.assert(t, o);
    }

    fn current(&self, var: &str) -> R<VarSymbols> {
        current_symbol(self.st, var).map_err(|_| format!("read of undefined variable '{var}'"))
    }

    fn list(&self, var: &str) -> R<ListRef> {
        let (arr, len) = list_syms(self.current(var)?).ok_or_else(|| format!("'{var}' is not a list"))?;
        Ok(ListRef {
            var: var.to_string(),
            arr,
            len,
        })
    }

    fn list_base(&self, e: &Expr) -> R<ListRef> {
        match &e.kind {
            ExprKind::Name(n) => self.list(n),
            _ => Err("subscript of a non-name".into()),
        }
    }

    fn elem_type(&self, var: &str) -> R<ScalarType> {
        self.st
            .types
            .get(var)
            .and_then(|t| t.element())
            .ok_or_else(|| format!("'{var}' is not a list"))
    }

    fn define(&mut self, var: &str) -> R<VarSymbols> {
        self.st
            .define(var, self.script)
            .map_err(|_| format!("assignment to untyped variable '{var}'"))
    }

    fn check_mutable(&self, var: &str) -> R<()> {
        if self.st.is_aliased(var) {
            Err("mutation of an aliased list".into())
        } else {
            Ok(())
        }
    }

    // ------------------------------------------------------------ statements

    fn stmt(&mut self, s: &StmtKind) -> R<()> {
        match s {
            StmtKind::Assign { target: LValue::Name(x), value } => self.assign_name(x, value),
            StmtKind::Assign {
                target: LValue::Index { base, index },
                value,
            } => {
                let l = self.list(base)?;
                let elem = self.elem_type(base)?;
                let idx = self.index(&l, index)?;
                let v = self.scalar(value)?;
                let v = coerce(v, elem)?;
                self.check_mutable(base)?;
                let (arr, len) = list_syms(self.define(base)?).unwrap();
                self.main(Term::eq(arr, Term::store(l.arr, idx, v)));
                self.main(Term::eq(len, l.len));
                Ok(())
            }
            StmtKind::AugAssign { .. } => Err("augmented assignment".into()),
            StmtKind::Append { list, value } => {
                let l = self.list(list)?;
                let elem = self.elem_type(list)?;
                let v = self.scalar(value)?;
                let v = coerce(v, elem)?;
                self.check_mutable(list)?;
                let (arr, len) = list_syms(self.define(list)?).unwrap();
                self.main(Term::eq(arr, Term::store(l.arr, l.len.clone(), v)));
                self.main(Term::eq(len, Term::bin(Op::Add, l.len, Term::Int(1))));
                Ok(())
            }
            StmtKind::ExprStmt(e) => match &e.kind {
                ExprKind::Pop(_) => self.expr(e).map(|_| ()),
                ExprKind::Opaque { construct, .. } => Err(construct.clone()),
                _ => Err("expression statement".into()),
            },
            StmtKind::Return(Some(e)) => {
                // only side constraints: the returned value is not constrained
                self.expr(e).map(|_| ())
            }
            StmtKind::Return(None) | StmtKind::Break | StmtKind::Continue => Ok(()),
            StmtKind::Opaque { construct, .. } => Err(construct.clone()),
            StmtKind::If { .. } | StmtKind::While { .. } | StmtKind::ForRange { .. } | StmtKind::ForEach { .. } => {
                Err("compound statement in a path step".into())
            }
        }
    }

    fn assign_name(&mut self, x: &str, value: &Expr) -> R<()> {
        let ty = self
            .st
            .types
            .get(x)
            .ok_or_else(|| format!("assignment to untyped variable '{x}'"))?;
        if let Some(elem) = ty.element() {
            return match &value.kind {
                ExprKind::ListLit(items) => {
                    let mut vals = Vec::with_capacity(items.len());
                    for it in items {
                        let v = self.scalar(it)?;
                        vals.push(coerce(v, elem)?);
                    }
                    self.st.unalias(x);
                    let (arr, len) = list_syms(self.define(x)?).unwrap();
                    for (i, v) in vals.into_iter().enumerate() {
                        self.main(Term::eq(Term::select(arr.clone(), Term::Int(i as i64)), v));
                    }
                    self.main(Term::eq(len, Term::Int(items.len() as i64)));
                    Ok(())
                }
                ExprKind::Name(y) => {
                    let src = self.list(y)?;
                    let (arr, len) = list_syms(self.define(x)?).unwrap();
                    if x != y {
                        self.st.alias(x, y);
                    }
                    self.main(Term::eq(arr, src.arr));
                    self.main(Term::eq(len, src.len));
                    Ok(())
                }
                ExprKind::Opaque { construct, .. } => Err(construct.clone()),
                _ => Err("list-valued expression".into()),
            };
        }
        let target = match ty {
            crate::typing::SubsetType::Int => ScalarType::Int,
            crate::typing::SubsetType::Float => ScalarType::Float,
            _ => ScalarType::Bool,
        };
        let v = self.scalar(value)?;
        let v = coerce(v, target)?;
        let VarSymbols::Scalar(sym) = self.define(x)? else {
            unreachable!()
        };
        self.main(Term::eq(Term::Sym(sym.name), v));
        Ok(())
    }

    // ----------------------------------------------------------- expressions

    fn scalar(&mut self, e: &Expr) -> R<(Term, ScalarType)> {
        match self.expr(e)? {
            TVal::Scalar(t, ty) => Ok((t, ty)),
            TVal::List => Err("list used as a value".into()),
        }
    }

    fn bool_expr(&mut self, e: &Expr) -> R<Term> {
        match self.scalar(e)? {
            (t, ScalarType::Bool) => Ok(t),
            _ => Err("non-boolean condition".into()),
        }
    }

    fn numeric(&mut self, e: &Expr) -> R<(Term, ScalarType)> {
        match self.scalar(e)? {
            (_, ScalarType::Bool) => Err("boolean arithmetic".into()),
            v => Ok(v),
        }
    }

    fn expr(&mut self, e: &Expr) -> R<TVal> {
        match &e.kind {
            ExprKind::Int(v) => Ok(TVal::Scalar(Term::Int(*v), ScalarType::Int)),
            ExprKind::Float(f) => Ok(TVal::Scalar(float_term(*f)?, ScalarType::Float)),
            ExprKind::Bool(b) => Ok(TVal::Scalar(Term::Bool(*b), ScalarType::Bool)),
            ExprKind::Name(n) => match self.current(n)? {
                VarSymbols::Scalar(s) => {
                    let ty = match s.sort {
                        Sort::Int => ScalarType::Int,
                        Sort::Real => ScalarType::Float,
                        _ => ScalarType::Bool,
                    };
                    Ok(TVal::Scalar(Term::Sym(s.name), ty))
                }
                VarSymbols::List { .. } => Ok(TVal::List),
            },
            ExprKind::Unary(UnaryOp::Neg, a) => {
                let (t, ty) = self.numeric(a)?;
                Ok(TVal::Scalar(Term::neg(t), ty))
            }
            ExprKind::Unary(UnaryOp::Not, a) => Ok(TVal::Scalar(Term::not(self.bool_expr(a)?), ScalarType::Bool)),
            ExprKind::Binary(op, l, r) => self.binary(*op, l, r).map(|(t, ty)| TVal::Scalar(t, ty)),
            ExprKind::Compare(op, l, r) => self.compare(*op, l, r).map(|t| TVal::Scalar(t, ScalarType::Bool)),
            ExprKind::Subscript { base, index } => {
                let l = self.list_base(base)?;
                let elem = self.elem_type(&l.var)?;
                let idx = self.index(&l, index)?;
                Ok(TVal::Scalar(Term::select(l.arr, idx), elem))
            }
            ExprKind::Len(a) => {
                let l = self.list_base(a).map_err(|_| "len of a non-list".to_string())?;
                Ok(TVal::Scalar(l.len, ScalarType::Int))
            }
            ExprKind::Abs(a) => {
                let (t, ty) = self.numeric(a)?;
                let zero = if is_real(ty) { Term::to_real(Term::Int(0)) } else { Term::Int(0) };
                Ok(TVal::Scalar(
                    Term::ite(Term::bin(Op::Ge, t.clone(), zero), t.clone(), Term::neg(t)),
                    ty,
                ))
            }
            ExprKind::Pop(a) => {
                if !self.guards.is_empty() {
                    return Err("pop inside a short-circuit operand".into());
                }
                let l = self.list_base(a)?;
                let elem = self.elem_type(&l.var)?;
                self.check_mutable(&l.var)?;
                let last = Term::bin(Op::Sub, l.len.clone(), Term::Int(1));
                let value = Term::select(l.arr.clone(), last.clone());
                self.side(Term::bin(Op::Gt, l.len.clone(), Term::Int(0)));
                let (arr, len) = list_syms(self.define(&l.var)?).unwrap();
                self.main(Term::eq(arr, l.arr));
                self.main(Term::eq(len, last));
                Ok(TVal::Scalar(value, elem))
            }
            ExprKind::ListLit(_) => Err("list literal in an expression".into()),
            ExprKind::Opaque { construct, .. } => Err(construct.clone()),
        }
    }

    /// Index term for `l[index]` plus its bounds side constraint.
    fn index(&mut self, l: &ListRef, index: &Expr) -> R<Term> {
        if let Some(k) = index.as_negative_literal() {
            self.side(Term::bin(Op::Ge, Term::Int(k), Term::neg(l.len.clone())));
            return Ok(Term::bin(Op::Sub, l.len.clone(), Term::Int(-k)));
        }
        let (i, ty) = self.scalar(index)?;
        if ty != ScalarType::Int {
            return Err("non-integer index".into());
        }
        let upper = Term::bin(Op::Lt, i.clone(), l.len.clone());
        if matches!(i, Term::Int(_)) {
            self.side(upper);
        } else {
            self.side(Term::and(vec![Term::bin(Op::Le, Term::Int(0), i.clone()), upper]));
        }
        Ok(i)
    }

    fn binary(&mut self, op: BinOp, l: &Expr, r: &Expr) -> R<(Term, ScalarType)> {
        if op.is_logical() {
            let a = self.bool_expr(l)?;
            let guard = if op == BinOp::And { a.clone() } else { Term::not(a.clone()) };
            self.guards.push(guard);
            let b = self.bool_expr(r);
            self.guards.pop();
            let b = b?;
            let t = if op == BinOp::And { Term::and(vec![a, b]) } else { Term::or(vec![a, b]) };
            return Ok((t, ScalarType::Bool));
        }
        let a = self.numeric(l)?;
        let b = self.numeric(r)?;
        let (a, b, ty) = unify(a, b);
        match op {
            BinOp::Add => Ok((Term::bin(Op::Add, a, b), ty)),
            BinOp::Sub => Ok((Term::bin(Op::Sub, a, b), ty)),
            BinOp::Mul => Ok((Term::bin(Op::Mul, a, b), ty)),
            BinOp::Div => {
                let (a, b) = (Term::to_real(a), Term::to_real(b));
                self.side(Term::not(Term::eq(b.clone(), Term::to_real(Term::Int(0)))));
                Ok((Term::bin(Op::RealDiv, a, b), ScalarType::Float))
            }
            BinOp::FloorDiv | BinOp::Mod => {
                let zero = if is_real(ty) { Term::to_real(Term::Int(0)) } else { Term::Int(0) };
                self.side(Term::not(Term::eq(b.clone(), zero)));
                let q = if is_real(ty) {
                    Term::to_real(Term::app(Op::ToInt, vec![Term::bin(Op::RealDiv, a.clone(), b.clone())]))
                } else {
                    self.floor_div(a.clone(), b.clone())
                };
                if op == BinOp::FloorDiv {
                    Ok((q, ty))
                } else {
                    Ok((Term::bin(Op::Sub, a, Term::bin(Op::Mul, b, q)), ty))
                }
            }
            BinOp::And | BinOp::Or => unreachable!(),
        }
    }

    /// Fresh `q` with `q = floor(a / b)` for integers, either divisor sign.
    fn floor_div(&mut self, a: Term, b: Term) -> Term {
        let q = self.st.fresh("fdiv", Sort::Int, self.script);
        let qb = Term::bin(Op::Mul, q.clone(), b.clone());
        let qb_b = Term::bin(Op::Add, qb.clone(), b.clone());
        let pos = Term::and(vec![
            Term::bin(Op::Gt, b.clone(), Term::Int(0)),
            Term::bin(Op::Le, qb.clone(), a.clone()),
            Term::bin(Op::Lt, a.clone(), qb_b.clone()),
        ]);
        let neg = Term::and(vec![
            Term::bin(Op::Lt, b, Term::Int(0)),
            Term::bin(Op::Ge, qb, a.clone()),
            Term::bin(Op::Gt, a, qb_b),
        ]);
        self.side(Term::or(vec![pos, neg]));
        q
    }

    fn compare(&mut self, op: CmpOp, l: &Expr, r: &Expr) -> R<Term> {
        let a = self.scalar(l)?;
        let b = self.scalar(r)?;
        let (a, b) = match (a, b) {
            ((a, ScalarType::Bool), (b, ScalarType::Bool)) => {
                if !matches!(op, CmpOp::Eq | CmpOp::Ne) {
                    return Err("ordering comparison of booleans".into());
                }
                (a, b)
            }
            ((_, ScalarType::Bool), _) | (_, (_, ScalarType::Bool)) => {
                return Err("comparison of a boolean with a number".into())
            }
            (a, b) => {
                let (a, b, _) = unify(a, b);
                (a, b)
            }
        };
        Ok(match op {
            CmpOp::Eq => Term::eq(a, b),
            CmpOp::Ne => Term::not(Term::eq(a, b)),
            CmpOp::Lt => Term::bin(Op::Lt, a, b),
            CmpOp::Le => Term::bin(Op::Le, a, b),
            CmpOp::Gt => Term::bin(Op::Gt, a, b),
            CmpOp::Ge => Term::bin(Op::Ge, a, b),
        })
    }
}

/// Brings two numbers to a common sort, converting Int to Real when mixed.
fn unify(a: (Term, ScalarType), b: (Term, ScalarType)) -> (Term, Term, ScalarType) {
    match (a, b) {
        ((a, ScalarType::Int), (b, ScalarType::Int)) => (a, b, ScalarType::Int),
        ((a, ta), (b, tb)) => {
            let a = if ta == ScalarType::Int { Term::to_real(a) } else { a };
            let b = if tb == ScalarType::Int { Term::to_real(b) } else { b };
            (a, b, ScalarType::Float)
        }
    }
}

fn coerce(v: (Term, ScalarType), target: ScalarType) -> R<Term> {
    match (v.1, target) {
        (a, b) if a == b => Ok(v.0),
        (ScalarType::Int, ScalarType::Float) => Ok(Term::to_real(v.0)),
        (a, b) => Err(format!("{a} value where {b} is expected")),
    }
}

/// Float literal as the rational its shortest decimal spelling denotes.
fn float_term(f: f64) -> R<Term> {
    if !f.is_finite() {
        return Err("non-finite float".into());
    }
    let text = format!("{}", f.abs());
    let r = if text.contains('.') {
        parse_decimal(&text)
    } else {
        parse_decimal(&format!("{text}.0"))
    }
    .ok_or("float literal")?;
    Ok(if f.is_sign_negative() && f != 0.0 {
        Term::Real(-r)
    } else {
        Term::Real(r)
    })
}
