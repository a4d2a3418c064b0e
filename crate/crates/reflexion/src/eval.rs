//! The standard (unmodified) interpretation loop: a universal evaluator over
//! s-expressions with seven primitive operators (`quote`, `atom`, `eq`,
//! `car`, `cdr`, `cons`, `cond`) plus `label` and `lambda` application.
//!
//! Definitions enter only through the environment; there is no `defun`,
//! no arithmetic and no host escape hatch. The helper suite (`assoc`,
//! `pair`, `append`, `list2`, `null`, `and`, `not`) mirrors the recursive
//! list functions the dispatch is built from and is shared with the
//! enriched loop in [`crate::reflexive`].

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::sexpr::{Expr, Symbol};

// Stack headroom for the recursive evaluators: grow the host stack well
// before it runs out so the configured depth limit is the only bound.
const STACK_RED_ZONE: usize = 96 * 1024;
const STACK_GROW: usize = 2 * 1024 * 1024;

// ---------------------------------------------------------------------------
// Environments
// ---------------------------------------------------------------------------

/// An association-list environment: ordered `(symbol, value)` bindings
/// searched front to back, so prepending shadows.
///
/// Environments are immutable; [`Env::with_binding`] shares the existing
/// tail, which is what makes per-step snapshots free.
#[derive(Clone, Default)]
pub struct Env {
    head: Option<Arc<Frame>>,
}

#[derive(Debug)]
struct Frame {
    name: Symbol,
    value: Expr,
    rest: Option<Arc<Frame>>,
}

/// Raised when an expression does not have the `((sym value) ...)` shape
/// an environment requires.
#[derive(Clone, Debug, PartialEq, Error)]
#[error("malformed environment entry: {0}")]
pub struct MalformedEnv(pub Expr);

impl Env {
    pub fn empty() -> Env {
        Env { head: None }
    }

    /// A new environment with `name` bound in front of `self`.
    pub fn with_binding(&self, name: Symbol, value: Expr) -> Env {
        Env {
            head: Some(Arc::new(Frame {
                name,
                value,
                rest: self.head.clone(),
            })),
        }
    }

    /// First match wins.
    pub fn lookup(&self, name: &Symbol) -> Option<&Expr> {
        let mut frame = self.head.as_deref();
        while let Some(f) = frame {
            if f.name == *name {
                return Some(&f.value);
            }
            frame = f.rest.as_deref();
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Expr)> {
        let mut frame = self.head.as_deref();
        std::iter::from_fn(move || {
            let f = frame?;
            frame = f.rest.as_deref();
            Some((&f.name, &f.value))
        })
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.head.is_none()
    }

    /// Reads an environment out of its expression form, a list of
    /// two-element lists whose first elements are symbols.
    pub fn from_expr(expr: &Expr) -> Result<Env, MalformedEnv> {
        let mut pairs = Vec::new();
        match expr {
            Expr::Nil => {}
            Expr::List(entries) => {
                for entry in entries.iter() {
                    let [key, value] = entry.elements() else {
                        return Err(MalformedEnv(entry.clone()));
                    };
                    let Expr::Sym(name) = key else {
                        return Err(MalformedEnv(entry.clone()));
                    };
                    pairs.push((name.clone(), value.clone()));
                }
            }
            other => return Err(MalformedEnv(other.clone())),
        }
        Ok(Env::from_pairs(pairs))
    }

    /// The inverse of [`Env::from_expr`].
    pub fn to_expr(&self) -> Expr {
        Expr::list(
            self.iter()
                .map(|(name, value)| Expr::list(vec![Expr::Sym(name.clone()), value.clone()]))
                .collect(),
        )
    }

    /// Builds an environment from front-to-back bindings.
    pub fn from_pairs(pairs: Vec<(Symbol, Expr)>) -> Env {
        let mut env = Env::empty();
        for (name, value) in pairs.into_iter().rev() {
            env = env.with_binding(name, value);
        }
        env
    }
}

impl PartialEq for Env {
    fn eq(&self, other: &Self) -> bool {
        match (&self.head, &other.head) {
            (None, None) => return true,
            (Some(a), Some(b)) if Arc::ptr_eq(a, b) => return true,
            _ => {}
        }
        self.iter().eq(other.iter().map(|(n, v)| (n, v)))
    }
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Env({})", self.to_expr())
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

// ---------------------------------------------------------------------------
// Errors and limits
// ---------------------------------------------------------------------------

/// Evaluation limits. `max_depth` bounds nested evaluator calls; exceeding
/// it yields [`EvalErrorKind::DepthExceeded`] rather than a host stack
/// failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_depth: usize,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits { max_depth: 10_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalErrorKind {
    UnboundSymbol,
    NotApplicable,
    BadArity,
    CarOfAtom,
    CdrOfAtom,
    ConsOfAtom,
    CondFellThrough,
    DepthExceeded,
}

impl EvalErrorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EvalErrorKind::UnboundSymbol => "UnboundSymbol",
            EvalErrorKind::NotApplicable => "NotApplicable",
            EvalErrorKind::BadArity => "BadArity",
            EvalErrorKind::CarOfAtom => "CarOfAtom",
            EvalErrorKind::CdrOfAtom => "CdrOfAtom",
            EvalErrorKind::ConsOfAtom => "ConsOfAtom",
            EvalErrorKind::CondFellThrough => "CondFellThrough",
            EvalErrorKind::DepthExceeded => "DepthExceeded",
        }
    }
}

/// An evaluation failure: what went wrong, the expression that triggered it,
/// and how many loop occurrences had completed when it did.
#[derive(Clone, Debug, PartialEq, Error)]
#[error("{}: {expr} (after {step_index} completed steps)", kind.name())]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub expr: Expr,
    pub step_index: u64,
}

impl EvalError {
    pub fn new(kind: EvalErrorKind, expr: Expr, step_index: u64) -> EvalError {
        EvalError { kind, expr, step_index }
    }
}

// ---------------------------------------------------------------------------
// The evaluator
// ---------------------------------------------------------------------------

struct Ctx<'a> {
    limits: &'a Limits,
    depth: usize,
    entries: u64,
    completed: u64,
}

/// Evaluates `e` in `env` with the standard interpretation loop.
pub fn eval_core(e: &Expr, env: &Env, limits: &Limits) -> Result<Expr, EvalError> {
    eval_core_instrumented(e, env, limits).0
}

/// Like [`eval_core`] but also reports how many evaluator calls were
/// entered. On success the count equals the number of completed loop
/// occurrences, which is what the enriched loop records as its trace.
pub fn eval_core_instrumented(
    e: &Expr,
    env: &Env,
    limits: &Limits,
) -> (Result<Expr, EvalError>, u64) {
    let mut ctx = Ctx { limits, depth: 0, entries: 0, completed: 0 };
    let result = eval_in(&mut ctx, e, env);
    (result, ctx.entries)
}

fn eval_in(ctx: &mut Ctx, e: &Expr, env: &Env) -> Result<Expr, EvalError> {
    ctx.entries += 1;
    ctx.depth += 1;
    if ctx.depth > ctx.limits.max_depth {
        ctx.depth -= 1;
        return Err(EvalError::new(EvalErrorKind::DepthExceeded, e.clone(), ctx.completed));
    }
    let result = stacker::maybe_grow(STACK_RED_ZONE, STACK_GROW, || dispatch(ctx, e, env));
    ctx.depth -= 1;
    if result.is_ok() {
        ctx.completed += 1;
    }
    result
}

/// One occurrence of the interpretation loop: the case analysis over the
/// current expression. All recursion goes through [`eval_in`].
fn dispatch(ctx: &mut Ctx, e: &Expr, env: &Env) -> Result<Expr, EvalError> {
    match e {
        // The empty list evaluates to itself; a lookup miss on it would be
        // indistinguishable from its own value anyway.
        Expr::Nil => Ok(Expr::Nil),
        Expr::Sym(name) => match env.lookup(name) {
            Some(value) => Ok(value.clone()),
            None => Err(EvalError::new(EvalErrorKind::UnboundSymbol, e.clone(), ctx.completed)),
        },
        // Integers are values, not variables; there is nothing to look up.
        Expr::Int(_) => {
            Err(EvalError::new(EvalErrorKind::UnboundSymbol, e.clone(), ctx.completed))
        }
        Expr::List(items) => match &items[0] {
            Expr::Sym(op) => match op.as_str() {
                "QUOTE" => {
                    let [_, arg] = expect_args::<2>(ctx, e, items)?;
                    Ok(arg.clone())
                }
                "ATOM" => {
                    let [_, arg] = expect_args::<2>(ctx, e, items)?;
                    let value = eval_in(ctx, arg, env)?;
                    Ok(truth_of(value.is_atom()))
                }
                "EQ" => {
                    let [_, a, b] = expect_args::<3>(ctx, e, items)?;
                    let left = eval_in(ctx, a, env)?;
                    let right = eval_in(ctx, b, env)?;
                    Ok(truth_of(atoms_eq(&left, &right)))
                }
                "CAR" => {
                    let [_, arg] = expect_args::<2>(ctx, e, items)?;
                    let value = eval_in(ctx, arg, env)?;
                    match value {
                        Expr::List(inner) => Ok(inner[0].clone()),
                        atom => {
                            Err(EvalError::new(EvalErrorKind::CarOfAtom, atom, ctx.completed))
                        }
                    }
                }
                "CDR" => {
                    let [_, arg] = expect_args::<2>(ctx, e, items)?;
                    let value = eval_in(ctx, arg, env)?;
                    match value {
                        Expr::List(inner) => Ok(Expr::list(inner[1..].to_vec())),
                        atom => {
                            Err(EvalError::new(EvalErrorKind::CdrOfAtom, atom, ctx.completed))
                        }
                    }
                }
                "CONS" => {
                    let [_, a, b] = expect_args::<3>(ctx, e, items)?;
                    let head = eval_in(ctx, a, env)?;
                    let tail = eval_in(ctx, b, env)?;
                    cons(ctx, head, tail)
                }
                "COND" => evcon_in(ctx, e, &items[1..], env),
                _ => match env.lookup(op) {
                    // Symbol in operator position: substitute its binding
                    // and take another loop occurrence.
                    Some(f) => {
                        let substituted = replace_head(f.clone(), items);
                        eval_in(ctx, &substituted, env)
                    }
                    None => Err(EvalError::new(
                        EvalErrorKind::NotApplicable,
                        e.clone(),
                        ctx.completed,
                    )),
                },
            },
            Expr::List(head) if head_is(head, "LABEL") => {
                let (name, body) = validate_label(ctx, head)?;
                let substituted = replace_head(body.clone(), items);
                let env = env.with_binding(name.clone(), items[0].clone());
                eval_in(ctx, &substituted, &env)
            }
            Expr::List(head) if head_is(head, "LAMBDA") => {
                let (params, body) = validate_lambda(ctx, head)?;
                let args = evlis_in(ctx, &items[1..], env)?;
                let env = bind_params(ctx, params, args, env)?;
                eval_in(ctx, body, &env)
            }
            _ => Err(EvalError::new(EvalErrorKind::NotApplicable, e.clone(), ctx.completed)),
        },
    }
}

fn head_is(head: &[Expr], name: &str) -> bool {
    matches!(&head[0], Expr::Sym(s) if s.as_str() == name)
}

fn truth_of(b: bool) -> Expr {
    if b {
        Expr::truth()
    } else {
        Expr::Nil
    }
}

/// `eq` is decided on atoms only; two non-empty lists are never `eq`, even
/// when structurally equal. (`NIL` is an atom, so `(eq x '())` works.)
fn atoms_eq(a: &Expr, b: &Expr) -> bool {
    a.is_atom() && b.is_atom() && a == b
}

fn cons(ctx: &Ctx, head: Expr, tail: Expr) -> Result<Expr, EvalError> {
    match tail {
        Expr::Nil => Ok(Expr::list(vec![head])),
        Expr::List(items) => {
            let mut all = Vec::with_capacity(items.len() + 1);
            all.push(head);
            all.extend_from_slice(&items);
            Ok(Expr::list(all))
        }
        // Only proper lists exist here, so consing onto a non-NIL atom has
        // no representable result.
        atom => Err(EvalError::new(EvalErrorKind::ConsOfAtom, atom, ctx.completed)),
    }
}

fn expect_args<'e, const N: usize>(
    ctx: &Ctx,
    e: &Expr,
    items: &'e [Expr],
) -> Result<&'e [Expr; N], EvalError> {
    items
        .try_into()
        .map_err(|_| EvalError::new(EvalErrorKind::BadArity, e.clone(), ctx.completed))
}

fn replace_head(head: Expr, items: &[Expr]) -> Expr {
    let mut all = Vec::with_capacity(items.len());
    all.push(head);
    all.extend_from_slice(&items[1..]);
    Expr::list(all)
}

/// `(LABEL name expr)` — the name is rebound to the whole label form.
fn validate_label<'e>(ctx: &Ctx, head: &'e [Expr]) -> Result<(&'e Symbol, &'e Expr), EvalError> {
    if let [_, Expr::Sym(name), body] = head {
        Ok((name, body))
    } else {
        Err(EvalError::new(
            EvalErrorKind::BadArity,
            Expr::list(head.to_vec()),
            ctx.completed,
        ))
    }
}

/// `(LAMBDA (params...) body)` with every parameter a symbol.
fn validate_lambda<'e>(ctx: &Ctx, head: &'e [Expr]) -> Result<(&'e Expr, &'e Expr), EvalError> {
    if let [_, params @ (Expr::Nil | Expr::List(_)), body] = head {
        Ok((params, body))
    } else {
        Err(EvalError::new(
            EvalErrorKind::BadArity,
            Expr::list(head.to_vec()),
            ctx.completed,
        ))
    }
}

/// Zips parameters with evaluated arguments in front of `env`. The zip
/// stops at the shorter side, exactly as [`pair`] does.
fn bind_params(ctx: &Ctx, params: &Expr, args: Vec<Expr>, env: &Env) -> Result<Env, EvalError> {
    let mut pairs = Vec::new();
    for (param, arg) in params.elements().iter().zip(args) {
        let Expr::Sym(name) = param else {
            return Err(EvalError::new(EvalErrorKind::BadArity, param.clone(), ctx.completed));
        };
        pairs.push((name.clone(), arg));
    }
    let mut extended = env.clone();
    for (name, value) in pairs.into_iter().rev() {
        extended = extended.with_binding(name, value);
    }
    Ok(extended)
}

fn evlis_in(ctx: &mut Ctx, args: &[Expr], env: &Env) -> Result<Vec<Expr>, EvalError> {
    args.iter().map(|arg| eval_in(ctx, arg, env)).collect()
}

fn evcon_in(ctx: &mut Ctx, cond: &Expr, clauses: &[Expr], env: &Env) -> Result<Expr, EvalError> {
    for clause in clauses {
        let parts = clause.elements();
        if parts.is_empty() {
            return Err(EvalError::new(EvalErrorKind::BadArity, clause.clone(), ctx.completed));
        }
        let test = eval_in(ctx, &parts[0], env)?;
        if test.is_truthy() {
            let [_, body] = parts else {
                return Err(EvalError::new(
                    EvalErrorKind::BadArity,
                    clause.clone(),
                    ctx.completed,
                ));
            };
            return eval_in(ctx, body, env);
        }
    }
    Err(EvalError::new(EvalErrorKind::CondFellThrough, cond.clone(), ctx.completed))
}

// ---------------------------------------------------------------------------
// Named operations over expressions
// ---------------------------------------------------------------------------

/// Evaluates `cond` clauses in order and returns the body paired with the
/// first truthy test.
pub fn evcon(clauses: &Expr, env: &Env, limits: &Limits) -> Result<Expr, EvalError> {
    let mut ctx = Ctx { limits, depth: 0, entries: 0, completed: 0 };
    evcon_in(&mut ctx, clauses, clauses.elements(), env)
}

/// Element-wise evaluation of a list, preserving order and length.
pub fn evlis(m: &Expr, env: &Env, limits: &Limits) -> Result<Expr, EvalError> {
    let mut ctx = Ctx { limits, depth: 0, entries: 0, completed: 0 };
    evlis_in(&mut ctx, m.elements(), env).map(Expr::list)
}

/// First-match association lookup over a `((key value) ...)` list.
/// Returns `NIL` on a miss; entries without that shape never match.
pub fn assoc(x: &Symbol, y: &Expr) -> Expr {
    for entry in y.elements() {
        if let [Expr::Sym(key), value] = entry.elements() {
            if key == x {
                return value.clone();
            }
        }
    }
    Expr::Nil
}

/// Zips two lists into two-element pairs, stopping at the shorter list.
/// Built on [`list2`]; a non-list argument behaves as the empty list.
pub fn pair(x: &Expr, y: &Expr) -> Expr {
    Expr::list(
        x.elements()
            .iter()
            .zip(y.elements())
            .map(|(a, b)| list2(a.clone(), b.clone()))
            .collect(),
    )
}

/// List concatenation; non-list arguments behave as the empty list.
pub fn append(x: &Expr, y: &Expr) -> Expr {
    let mut all = x.elements().to_vec();
    all.extend_from_slice(y.elements());
    Expr::list(all)
}

/// The private two-element list constructor the zipper is built on.
pub fn list2(x: Expr, y: Expr) -> Expr {
    Expr::list(vec![x, y])
}

/// `T` when `x` is the empty list, `NIL` otherwise.
pub fn null(x: &Expr) -> Expr {
    truth_of(!x.is_truthy())
}

/// Eager conjunction over already-computed values.
pub fn and(x: &Expr, y: &Expr) -> Expr {
    truth_of(x.is_truthy() && y.is_truthy())
}

pub fn not(x: &Expr) -> Expr {
    truth_of(!x.is_truthy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::read;

    fn env_from(src: &str) -> Env {
        Env::from_expr(&read(src).unwrap()).unwrap()
    }

    fn eval_str(program: &str, env_src: &str) -> Result<Expr, EvalError> {
        eval_core(&read(program).unwrap(), &env_from(env_src), &Limits::default())
    }

    // ── golden evaluations ──────────────────────────────────────────────

    #[test]
    fn atom_lookup() {
        assert_eq!(eval_str("a", "((a 1))").unwrap(), Expr::Int(1));
    }

    #[test]
    fn car_of_quoted_list() {
        assert_eq!(eval_str("(car '(a b))", "()").unwrap(), Expr::symbol("A"));
    }

    #[test]
    fn quote_is_identity() {
        assert_eq!(eval_str("(quote x)", "()").unwrap(), Expr::symbol("X"));
    }

    const LIST_FNS_ENV: &str = "
        ((my-last (label my-last
                    (lambda (x)
                      (cond
                        ((null. x) 'nil)
                        ((null. (cdr x)) (car x))
                        ('t (my-last (cdr x)))))))
         (null. (label null. (lambda (x) (eq x nil)))))";

    #[test]
    fn recursive_my_last() {
        assert_eq!(eval_str("(my-last '(a b c))", LIST_FNS_ENV).unwrap(), Expr::symbol("C"));
        assert_eq!(eval_str("(my-last '(a))", LIST_FNS_ENV).unwrap(), Expr::symbol("A"));
        assert_eq!(eval_str("(my-last '())", LIST_FNS_ENV).unwrap(), Expr::Nil);
    }

    // ── primitive semantics ─────────────────────────────────────────────

    #[test]
    fn nil_evaluates_to_itself() {
        assert_eq!(eval_str("nil", "()").unwrap(), Expr::Nil);
        assert_eq!(eval_str("()", "()").unwrap(), Expr::Nil);
    }

    #[test]
    fn atom_primitive() {
        assert_eq!(eval_str("(atom 'x)", "()").unwrap(), Expr::truth());
        assert_eq!(eval_str("(atom '())", "()").unwrap(), Expr::truth());
        assert_eq!(eval_str("(atom '(a))", "()").unwrap(), Expr::Nil);
    }

    #[test]
    fn eq_is_atom_equality() {
        assert_eq!(eval_str("(eq 'a 'a)", "()").unwrap(), Expr::truth());
        assert_eq!(eval_str("(eq 'a 'b)", "()").unwrap(), Expr::Nil);
        assert_eq!(eval_str("(eq '() '())", "()").unwrap(), Expr::truth());
        // structurally equal non-empty lists are not eq
        assert_eq!(eval_str("(eq '(a) '(a))", "()").unwrap(), Expr::Nil);
        assert_eq!(eval_str("(eq 'a '(a))", "()").unwrap(), Expr::Nil);
    }

    #[test]
    fn cons_car_cdr() {
        assert_eq!(eval_str("(cons 'a '(b))", "()").unwrap(), read("(a b)").unwrap());
        assert_eq!(eval_str("(cons 'a '())", "()").unwrap(), read("(a)").unwrap());
        assert_eq!(eval_str("(cdr '(a b))", "()").unwrap(), read("(b)").unwrap());
        assert_eq!(eval_str("(cdr '(a))", "()").unwrap(), Expr::Nil);
    }

    #[test]
    fn shadowed_operator_is_looked_up_through_the_environment() {
        // f -> g -> a lambda; symbol operators chain through the env
        let env = "((f g) (g (lambda (x) (cons x '()))))";
        assert_eq!(eval_str("(f 'a)", env).unwrap(), read("(a)").unwrap());
    }

    #[test]
    fn primitives_are_not_shadowable() {
        assert_eq!(eval_str("(quote x)", "((quote 9))").unwrap(), Expr::symbol("X"));
    }

    #[test]
    fn lambda_binds_arguments_in_order() {
        assert_eq!(
            eval_str("((lambda (x y) (cons x (cons y '()))) 'a 'b)", "()").unwrap(),
            read("(a b)").unwrap()
        );
        // inner binding shadows outer
        assert_eq!(
            eval_str("((lambda (x) ((lambda (x) x) 'inner)) 'outer)", "()").unwrap(),
            Expr::symbol("INNER")
        );
    }

    #[test]
    fn label_allows_self_reference() {
        let program = "((label rev-tail (lambda (x)
                          (cond ((null. x) 'done) ('t (rev-tail (cdr x))))))
                        '(a b c))";
        let env = "((null. (lambda (x) (eq x nil))))";
        assert_eq!(eval_str(program, env).unwrap(), Expr::symbol("DONE"));
    }

    // ── error paths ─────────────────────────────────────────────────────

    #[test]
    fn unbound_symbol() {
        let err = eval_str("x", "()").unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::UnboundSymbol);
        assert_eq!(err.expr, Expr::symbol("X"));
    }

    #[test]
    fn integer_atoms_have_no_binding() {
        assert_eq!(eval_str("1", "((a 1))").unwrap_err().kind, EvalErrorKind::UnboundSymbol);
    }

    #[test]
    fn car_and_cdr_of_atoms_fail() {
        assert_eq!(eval_str("(car 'x)", "()").unwrap_err().kind, EvalErrorKind::CarOfAtom);
        assert_eq!(eval_str("(car '())", "()").unwrap_err().kind, EvalErrorKind::CarOfAtom);
        assert_eq!(eval_str("(cdr 'x)", "()").unwrap_err().kind, EvalErrorKind::CdrOfAtom);
    }

    #[test]
    fn cons_onto_a_non_list_fails() {
        let err = eval_str("(cons 'a 'b)", "()").unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::ConsOfAtom);
        assert_eq!(err.expr, Expr::symbol("B"));
    }

    #[test]
    fn cond_falls_through_when_no_test_is_truthy() {
        assert_eq!(eval_str("(cond)", "()").unwrap_err().kind, EvalErrorKind::CondFellThrough);
        assert_eq!(
            eval_str("(cond ('() 'a))", "()").unwrap_err().kind,
            EvalErrorKind::CondFellThrough
        );
    }

    #[test]
    fn malformed_clause_with_truthy_test_is_bad_arity() {
        assert_eq!(eval_str("(cond ('t))", "()").unwrap_err().kind, EvalErrorKind::BadArity);
        assert_eq!(
            eval_str("(cond ('t 'a 'b))", "()").unwrap_err().kind,
            EvalErrorKind::BadArity
        );
        // a falsy test skips the malformed clause before its shape matters
        assert_eq!(eval_str("(cond ('() ) ('t 'ok))", "()").unwrap(), Expr::symbol("OK"));
    }

    #[test]
    fn primitive_arity_is_checked() {
        for program in ["(quote)", "(quote a b)", "(car)", "(eq 'a)", "(cons 'a)"] {
            assert_eq!(eval_str(program, "()").unwrap_err().kind, EvalErrorKind::BadArity);
        }
    }

    #[test]
    fn applying_nothing_applicable_fails() {
        assert_eq!(eval_str("(f 'a)", "()").unwrap_err().kind, EvalErrorKind::NotApplicable);
        assert_eq!(
            eval_str("((quote f) 'a)", "()").unwrap_err().kind,
            EvalErrorKind::NotApplicable
        );
        assert_eq!(eval_str("(1 2)", "()").unwrap_err().kind, EvalErrorKind::NotApplicable);
    }

    #[test]
    fn runaway_recursion_hits_the_depth_limit() {
        let program = "((label loop (lambda (x) (loop x))) 'a)";
        let limits = Limits { max_depth: 500 };
        let err = eval_core(&read(program).unwrap(), &Env::empty(), &limits).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::DepthExceeded);
    }

    #[test]
    fn depth_limit_is_exact_at_the_boundary() {
        // (car (quote (a))) enters the evaluator twice, nested once
        let program = read("(car '(a))").unwrap();
        let ok = eval_core(&program, &Env::empty(), &Limits { max_depth: 2 });
        assert_eq!(ok.unwrap(), Expr::symbol("A"));
        let err = eval_core(&program, &Env::empty(), &Limits { max_depth: 1 }).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::DepthExceeded);
    }

    #[test]
    fn deep_recursion_is_reported_not_crashed() {
        // would recurse far past any sane host stack; must return an error
        let program = "((label loop (lambda (x) (loop x))) 'a)";
        let err = eval_core(&read(program).unwrap(), &Env::empty(), &Limits::default())
            .unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::DepthExceeded);
    }

    #[test]
    fn error_reports_completed_step_count() {
        // (cons (quote a) x): the quote completes, then x fails
        let err = eval_str("(cons 'a x)", "()").unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::UnboundSymbol);
        assert_eq!(err.step_index, 1);
    }

    // ── environment behavior ────────────────────────────────────────────

    #[test]
    fn first_binding_shadows() {
        let env = env_from("((a 1) (a 2))");
        assert_eq!(env.lookup(&Symbol::new("a")), Some(&Expr::Int(1)));
    }

    #[test]
    fn env_to_expr_round_trips() {
        let env = env_from("((a 1) (b (c d)))");
        assert_eq!(Env::from_expr(&env.to_expr()).unwrap(), env);
        assert_eq!(Env::empty().to_expr(), Expr::Nil);
    }

    #[test]
    fn malformed_env_shapes_are_rejected() {
        for src in ["(a)", "((a))", "((a 1 2))", "((1 a))", "(((x) 1))", "((nil 1))", "5"] {
            assert!(Env::from_expr(&read(src).unwrap()).is_err(), "accepted {src}");
        }
    }

    // ── helper suite ────────────────────────────────────────────────────

    #[test]
    fn assoc_first_match_wins() {
        let y = read("((a 1) (a 2))").unwrap();
        assert_eq!(assoc(&Symbol::new("a"), &y), Expr::Int(1));
        assert_eq!(assoc(&Symbol::new("b"), &read("((a 1))").unwrap()), Expr::Nil);
        assert_eq!(assoc(&Symbol::new("a"), &Expr::Nil), Expr::Nil);
    }

    #[test]
    fn pair_zips_equal_lengths() {
        let zipped = pair(&read("(x y)").unwrap(), &read("(1 2)").unwrap());
        assert_eq!(zipped, read("((x 1) (y 2))").unwrap());
    }

    #[test]
    fn pair_stops_at_the_shorter_list() {
        let zipped = pair(&read("(x y)").unwrap(), &read("(1)").unwrap());
        assert_eq!(zipped, read("((x 1))").unwrap());
        assert_eq!(pair(&Expr::symbol("x"), &read("(1)").unwrap()), Expr::Nil);
    }

    #[test]
    fn append_list2_null_and_not() {
        assert_eq!(
            append(&read("(a)").unwrap(), &read("(b)").unwrap()),
            read("(a b)").unwrap()
        );
        assert_eq!(append(&Expr::Nil, &read("(b)").unwrap()), read("(b)").unwrap());
        assert_eq!(list2(Expr::symbol("a"), Expr::Nil), read("(a nil)").unwrap());
        assert_eq!(null(&Expr::Nil), Expr::truth());
        assert_eq!(null(&Expr::symbol("a")), Expr::Nil);
        assert_eq!(and(&Expr::truth(), &Expr::Nil), Expr::Nil);
        assert_eq!(and(&Expr::truth(), &Expr::Int(0)), Expr::truth());
        assert_eq!(not(&Expr::truth()), Expr::Nil);
        assert_eq!(not(&Expr::Nil), Expr::truth());
    }

    // ── named operations ────────────────────────────────────────────────

    #[test]
    fn evcon_returns_first_truthy_body() {
        let limits = Limits::default();
        let clauses = read("(((quote t) (quote yes)))").unwrap();
        assert_eq!(evcon(&clauses, &Env::empty(), &limits).unwrap(), Expr::symbol("YES"));

        let clauses = read("((x (quote p)) ((quote t) (quote q)))").unwrap();
        let env = env_from("((x ()))");
        assert_eq!(evcon(&clauses, &env, &limits).unwrap(), Expr::symbol("Q"));

        let err = evcon(&Expr::Nil, &Env::empty(), &limits).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::CondFellThrough);
    }

    #[test]
    fn evlis_preserves_order_and_propagates_errors() {
        let limits = Limits::default();
        assert_eq!(evlis(&Expr::Nil, &Env::empty(), &limits).unwrap(), Expr::Nil);
        let m = read("((quote a) (quote b))").unwrap();
        assert_eq!(evlis(&m, &Env::empty(), &limits).unwrap(), read("(a b)").unwrap());
        let err = evlis(&read("(x)").unwrap(), &Env::empty(), &limits).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::UnboundSymbol);
    }

    #[test]
    fn instrumented_counter_counts_entries() {
        let limits = Limits::default();
        let (result, entries) =
            eval_core_instrumented(&read("(car '(a b))").unwrap(), &Env::empty(), &limits);
        assert_eq!(result.unwrap(), Expr::symbol("A"));
        assert_eq!(entries, 2); // the car form and its quoted argument

        let (result, entries) = eval_core_instrumented(&read("'x").unwrap(), &Env::empty(), &limits);
        assert_eq!(result.unwrap(), Expr::symbol("X"));
        assert_eq!(entries, 1);
    }
}
