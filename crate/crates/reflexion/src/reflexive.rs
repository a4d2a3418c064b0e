//! The enriched interpretation loop.
//!
//! [`eval_reflexive`] runs the same case analysis as [`eval_core`] but wraps
//! every occurrence of the loop with, depending on [`Mode`]:
//!
//! 1. nothing (`Standard`);
//! 2. local introspection — the code and environment of the current
//!    instruction are reified into a [`StepRecord`] (`Tracing`);
//! 3. an upper step — the reified instruction is executed a second time
//!    with the standard evaluator and must reproduce the first result
//!    (`Mirroring`);
//! 4. hook-inserted instructions — a [`StepHook`] runs over the whole trace
//!    so far and its [`Emission`]s are attached to the record
//!    (`Augmentation`);
//! 5. global introspection — a snapshot of the entire program under
//!    execution joins the record (`Reflexion`).
//!
//! Records are appended in post-order: a step is recorded only once its
//! result is known, so child steps always precede their parent. The second
//! execution never perturbs the first: whenever [`eval_core`] succeeds,
//! every mode returns a structurally equal result.

use std::fmt;

use thiserror::Error;

use crate::eval::{eval_core, Env, EvalError, EvalErrorKind, Limits};
use crate::render::step_line;
use crate::sexpr::{Expr, Symbol};

const STACK_RED_ZONE: usize = 96 * 1024;
const STACK_GROW: usize = 2 * 1024 * 1024;

// ---------------------------------------------------------------------------
// Modes
// ---------------------------------------------------------------------------

/// The five variants of the interpretation loop, each strictly enriching
/// the previous one. The derived order is total and decides which record
/// fields a run populates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Standard,
    Tracing,
    Mirroring,
    Augmentation,
    Reflexion,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Standard,
        Mode::Tracing,
        Mode::Mirroring,
        Mode::Augmentation,
        Mode::Reflexion,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::Tracing => "tracing",
            Mode::Mirroring => "mirroring",
            Mode::Augmentation => "augmentation",
            Mode::Reflexion => "reflexion",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown mode: {s}"))
    }
}

// ---------------------------------------------------------------------------
// Records and traces
// ---------------------------------------------------------------------------

/// One completed occurrence of the interpretation loop.
///
/// `input_expr`/`input_env`/`output_expr` are always present.
/// `mirror_output` is populated in modes ≥ `Mirroring` and always equals
/// `output_expr`; `hook_emissions` only in modes ≥ `Augmentation`;
/// `global_snapshot` only in `Reflexion`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// Post-order completion index, 0-based.
    pub step_index: usize,
    pub input_expr: Expr,
    pub input_env: Env,
    pub output_expr: Expr,
    pub mirror_output: Option<Expr>,
    pub hook_emissions: Vec<Emission>,
    pub hook_failure: Option<HookError>,
    pub global_snapshot: Option<ProgramSnapshot>,
}

impl StepRecord {
    pub fn new(input_expr: Expr, input_env: Env, output_expr: Expr) -> StepRecord {
        StepRecord {
            step_index: 0,
            input_expr,
            input_env,
            output_expr,
            mirror_output: None,
            hook_emissions: Vec::new(),
            hook_failure: None,
            global_snapshot: None,
        }
    }
}

/// What global introspection sees at one step: the code of the entire
/// program under execution (identical across a run), the environment of the
/// current step, and how many steps had completed beforehand.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgramSnapshot {
    pub top_level_expr: Expr,
    pub env_at_step: Env,
    pub completed_steps: usize,
}

/// An append-only sequence of step records with consecutive indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    records: Vec<StepRecord>,
}

impl Trace {
    pub fn new() -> Trace {
        Trace::default()
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, StepRecord> {
        self.records.iter()
    }
}

// ---------------------------------------------------------------------------
// Hooks and emissions
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmissionKind {
    TraceLine,
    MirrorResult,
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EmissionPayload {
    Text(String),
    Expr(Expr),
}

/// One instruction inserted by a hook into the upper step, recorded in
/// invocation order.
#[derive(Clone, Debug, PartialEq)]
pub struct Emission {
    pub kind: EmissionKind,
    pub payload: EmissionPayload,
}

impl Emission {
    pub fn trace_line(text: String) -> Emission {
        Emission { kind: EmissionKind::TraceLine, payload: EmissionPayload::Text(text) }
    }

    pub fn mirror_result(expr: Expr) -> Emission {
        Emission { kind: EmissionKind::MirrorResult, payload: EmissionPayload::Expr(expr) }
    }

    pub fn custom_text(text: String) -> Emission {
        Emission { kind: EmissionKind::Custom, payload: EmissionPayload::Text(text) }
    }

    pub fn custom_expr(expr: Expr) -> Emission {
        Emission { kind: EmissionKind::Custom, payload: EmissionPayload::Expr(expr) }
    }
}

/// A hook failure. It attaches to the step record; it never changes the
/// result of the run.
#[derive(Clone, Debug, PartialEq, Error)]
#[error("hook failed: {message}")]
pub struct HookError {
    pub message: String,
}

impl HookError {
    pub fn new(message: impl Into<String>) -> HookError {
        HookError { message: message.into() }
    }
}

/// Inserted instructions for the upper step. The hook receives the whole
/// trace so far — the current step is always its last record — and returns
/// emissions. It cannot modify the program, the environment, or any record.
pub trait StepHook: Send + Sync {
    fn on_step(&self, trace: &Trace, limits: &Limits) -> Result<Vec<Emission>, HookError>;
}

impl<F> StepHook for F
where
    F: Fn(&Trace, &Limits) -> Result<Vec<Emission>, HookError> + Send + Sync,
{
    fn on_step(&self, trace: &Trace, limits: &Limits) -> Result<Vec<Emission>, HookError> {
        self(trace, limits)
    }
}

/// The built-in mirroring hook: re-derives the last step's output with the
/// standard evaluator and emits one `(input env) -> output` trace line plus
/// the mirrored value itself.
#[derive(Clone, Copy, Debug, Default)]
pub struct MirrorHook;

impl StepHook for MirrorHook {
    fn on_step(&self, trace: &Trace, limits: &Limits) -> Result<Vec<Emission>, HookError> {
        let record = trace
            .last()
            .ok_or_else(|| HookError::new("mirror hook invoked on an empty trace"))?;
        let mirrored = mirror_step(record, limits).map_err(|e| HookError::new(e.to_string()))?;
        let line = step_line(&record.input_expr, &record.input_env, &mirrored);
        Ok(vec![Emission::trace_line(line), Emission::mirror_result(mirrored)])
    }
}

pub fn builtin_mirror_hook() -> MirrorHook {
    MirrorHook
}

// ---------------------------------------------------------------------------
// Step components
// ---------------------------------------------------------------------------

/// Local procedural introspection: reifies the code of the instruction
/// under execution and its environment as data. Identity on its inputs —
/// the point is that the pair now exists as a value.
pub fn local_introspect(current: &Expr, env: &Env) -> (Expr, Env) {
    (current.clone(), env.clone())
}

/// The upper step: re-executes a record's instruction with the standard
/// evaluator (never the enriched one, which would regress) and returns the
/// duplicate result.
pub fn mirror_step(record: &StepRecord, limits: &Limits) -> Result<Expr, EvalError> {
    eval_core(&record.input_expr, &record.input_env, limits)
}

/// What global introspection reads at one step.
pub struct RunState<'a> {
    pub top_level_expr: &'a Expr,
    pub env_at_step: &'a Env,
    pub completed_steps: usize,
}

/// Global procedural introspection: snapshots the code of the entire
/// program under execution.
pub fn global_introspect(state: &RunState<'_>) -> ProgramSnapshot {
    ProgramSnapshot {
        top_level_expr: state.top_level_expr.clone(),
        env_at_step: state.env_at_step.clone(),
        completed_steps: state.completed_steps,
    }
}

/// Appends a completed step to the trace, then lets the hook insert its
/// additional instructions. The hook sees the record it is reacting to as
/// the last element; its emissions (or its failure) attach to that record.
pub fn augment(
    trace: &mut Trace,
    mut record: StepRecord,
    hook: Option<&dyn StepHook>,
    limits: &Limits,
) {
    record.step_index = trace.records.len();
    trace.records.push(record);
    if let Some(hook) = hook {
        let outcome = hook.on_step(trace, limits);
        let current = trace.records.last_mut().expect("record was just pushed");
        match outcome {
            Ok(emissions) => current.hook_emissions = emissions,
            Err(failure) => current.hook_failure = Some(failure),
        }
    }
}

// ---------------------------------------------------------------------------
// The enriched evaluator
// ---------------------------------------------------------------------------

/// Failure of an enriched run.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum ReflexiveError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    /// The upper step did not reproduce the lower step's result. With an
    /// immutable environment this cannot happen; it is kept as a checked
    /// internal error rather than an assumption.
    #[error("mirror diverged at step {step_index}: expected {expected}, found {found:?}")]
    MirrorDivergence {
        step_index: usize,
        expected: Expr,
        found: Result<Expr, EvalError>,
    },
}

impl ReflexiveError {
    /// The underlying evaluation error, when this is one.
    pub fn as_eval(&self) -> Option<&EvalError> {
        match self {
            ReflexiveError::Eval(e) => Some(e),
            ReflexiveError::MirrorDivergence { .. } => None,
        }
    }
}

/// Runs `e` in `env` under the loop variant selected by `mode`, returning
/// the result and the trace accumulated along the way (empty in `Standard`
/// mode; partial up to the failing step on an error).
///
/// `hook` is consulted in modes ≥ `Augmentation`; passing `None` there
/// selects the built-in mirroring hook. Below `Augmentation` hooks never
/// run.
pub fn eval_reflexive(
    e: &Expr,
    env: &Env,
    mode: Mode,
    hook: Option<&dyn StepHook>,
    limits: &Limits,
) -> (Result<Expr, ReflexiveError>, Trace) {
    static DEFAULT_HOOK: MirrorHook = MirrorHook;
    let hook = if mode >= Mode::Augmentation {
        Some(hook.unwrap_or(&DEFAULT_HOOK))
    } else {
        None
    };
    let mut run = Run {
        mode,
        hook,
        limits,
        top_level: e,
        depth: 0,
        completed: 0,
        trace: Trace::new(),
    };
    let result = run.step(e, env);
    (result, run.trace)
}

struct Run<'a> {
    mode: Mode,
    hook: Option<&'a dyn StepHook>,
    limits: &'a Limits,
    top_level: &'a Expr,
    depth: usize,
    completed: u64,
    trace: Trace,
}

impl Run<'_> {
    /// One occurrence of the enriched loop: the lower step, then — once the
    /// output is known — introspection, mirroring, augmentation and the
    /// global snapshot, as the mode demands.
    fn step(&mut self, e: &Expr, env: &Env) -> Result<Expr, ReflexiveError> {
        self.depth += 1;
        if self.depth > self.limits.max_depth {
            self.depth -= 1;
            return Err(EvalError::new(
                EvalErrorKind::DepthExceeded,
                e.clone(),
                self.completed,
            )
            .into());
        }
        let result =
            stacker::maybe_grow(STACK_RED_ZONE, STACK_GROW, || self.lower_step(e, env));
        self.depth -= 1;
        let output = result?;

        if self.mode >= Mode::Tracing {
            let (input_expr, input_env) = local_introspect(e, env);
            let mut record = StepRecord::new(input_expr, input_env, output.clone());
            if self.mode >= Mode::Mirroring {
                match mirror_step(&record, self.limits) {
                    Ok(mirrored) if mirrored == record.output_expr => {
                        record.mirror_output = Some(mirrored);
                    }
                    found => {
                        return Err(ReflexiveError::MirrorDivergence {
                            step_index: self.trace.len(),
                            expected: record.output_expr,
                            found,
                        });
                    }
                }
            }
            if self.mode >= Mode::Reflexion {
                record.global_snapshot = Some(global_introspect(&RunState {
                    top_level_expr: self.top_level,
                    env_at_step: &record.input_env,
                    completed_steps: self.trace.len(),
                }));
            }
            augment(&mut self.trace, record, self.hook, self.limits);
        }
        self.completed += 1;
        Ok(output)
    }

    /// The unmodified interpretation loop — the same case analysis as the
    /// standard evaluator, with every sub-evaluation routed back through
    /// [`Run::step`] so each one is a loop occurrence of its own.
    fn lower_step(&mut self, e: &Expr, env: &Env) -> Result<Expr, ReflexiveError> {
        match e {
            Expr::Nil => Ok(Expr::Nil),
            Expr::Sym(name) => match env.lookup(name) {
                Some(value) => Ok(value.clone()),
                None => Err(self.err(EvalErrorKind::UnboundSymbol, e.clone())),
            },
            Expr::Int(_) => Err(self.err(EvalErrorKind::UnboundSymbol, e.clone())),
            Expr::List(items) => match &items[0] {
                Expr::Sym(op) => match op.as_str() {
                    "QUOTE" => {
                        let [_, arg] = self.expect_args::<2>(e, items)?;
                        Ok(arg.clone())
                    }
                    "ATOM" => {
                        let [_, arg] = self.expect_args::<2>(e, items)?;
                        let value = self.step(arg, env)?;
                        Ok(truth_of(value.is_atom()))
                    }
                    "EQ" => {
                        let [_, a, b] = self.expect_args::<3>(e, items)?;
                        let left = self.step(a, env)?;
                        let right = self.step(b, env)?;
                        Ok(truth_of(left.is_atom() && right.is_atom() && left == right))
                    }
                    "CAR" => {
                        let [_, arg] = self.expect_args::<2>(e, items)?;
                        match self.step(arg, env)? {
                            Expr::List(inner) => Ok(inner[0].clone()),
                            atom => Err(self.err(EvalErrorKind::CarOfAtom, atom)),
                        }
                    }
                    "CDR" => {
                        let [_, arg] = self.expect_args::<2>(e, items)?;
                        match self.step(arg, env)? {
                            Expr::List(inner) => Ok(Expr::list(inner[1..].to_vec())),
                            atom => Err(self.err(EvalErrorKind::CdrOfAtom, atom)),
                        }
                    }
                    "CONS" => {
                        let [_, a, b] = self.expect_args::<3>(e, items)?;
                        let head = self.step(a, env)?;
                        match self.step(b, env)? {
                            Expr::Nil => Ok(Expr::list(vec![head])),
                            Expr::List(rest) => {
                                let mut all = Vec::with_capacity(rest.len() + 1);
                                all.push(head);
                                all.extend_from_slice(&rest);
                                Ok(Expr::list(all))
                            }
                            atom => Err(self.err(EvalErrorKind::ConsOfAtom, atom)),
                        }
                    }
                    "COND" => self.clauses(e, &items[1..], env),
                    _ => match env.lookup(op) {
                        Some(f) => {
                            let substituted = replace_head(f.clone(), items);
                            self.step(&substituted, env)
                        }
                        None => Err(self.err(EvalErrorKind::NotApplicable, e.clone())),
                    },
                },
                Expr::List(head) if head_is(head, "LABEL") => {
                    let (name, body) = self.validate_label(head)?;
                    let substituted = replace_head(body.clone(), items);
                    let env = env.with_binding(name.clone(), items[0].clone());
                    self.step(&substituted, &env)
                }
                Expr::List(head) if head_is(head, "LAMBDA") => {
                    let (params, body) = self.validate_lambda(head)?;
                    let mut args = Vec::with_capacity(items.len() - 1);
                    for arg in &items[1..] {
                        args.push(self.step(arg, env)?);
                    }
                    let env = self.bind_params(params, args, env)?;
                    self.step(body, &env)
                }
                _ => Err(self.err(EvalErrorKind::NotApplicable, e.clone())),
            },
        }
    }

    fn clauses(&mut self, cond: &Expr, clauses: &[Expr], env: &Env) -> Result<Expr, ReflexiveError> {
        for clause in clauses {
            let parts = clause.elements();
            if parts.is_empty() {
                return Err(self.err(EvalErrorKind::BadArity, clause.clone()));
            }
            let test = self.step(&parts[0], env)?;
            if test.is_truthy() {
                let [_, body] = parts else {
                    return Err(self.err(EvalErrorKind::BadArity, clause.clone()));
                };
                return self.step(body, env);
            }
        }
        Err(self.err(EvalErrorKind::CondFellThrough, cond.clone()))
    }

    fn validate_label<'e>(&self, head: &'e [Expr]) -> Result<(&'e Symbol, &'e Expr), ReflexiveError> {
        if let [_, Expr::Sym(name), body] = head {
            Ok((name, body))
        } else {
            Err(self.err(EvalErrorKind::BadArity, Expr::list(head.to_vec())))
        }
    }

    fn validate_lambda<'e>(&self, head: &'e [Expr]) -> Result<(&'e Expr, &'e Expr), ReflexiveError> {
        if let [_, params @ (Expr::Nil | Expr::List(_)), body] = head {
            Ok((params, body))
        } else {
            Err(self.err(EvalErrorKind::BadArity, Expr::list(head.to_vec())))
        }
    }

    fn bind_params(&self, params: &Expr, args: Vec<Expr>, env: &Env) -> Result<Env, ReflexiveError> {
        let mut pairs = Vec::new();
        for (param, arg) in params.elements().iter().zip(args) {
            let Expr::Sym(name) = param else {
                return Err(self.err(EvalErrorKind::BadArity, param.clone()));
            };
            pairs.push((name.clone(), arg));
        }
        let mut extended = env.clone();
        for (name, value) in pairs.into_iter().rev() {
            extended = extended.with_binding(name, value);
        }
        Ok(extended)
    }

    fn expect_args<'e, const N: usize>(
        &self,
        e: &Expr,
        items: &'e [Expr],
    ) -> Result<&'e [Expr; N], ReflexiveError> {
        items
            .try_into()
            .map_err(|_| self.err(EvalErrorKind::BadArity, e.clone()))
    }

    fn err(&self, kind: EvalErrorKind, expr: Expr) -> ReflexiveError {
        EvalError::new(kind, expr, self.completed).into()
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

fn replace_head(head: Expr, items: &[Expr]) -> Expr {
    let mut all = Vec::with_capacity(items.len());
    all.push(head);
    all.extend_from_slice(&items[1..]);
    Expr::list(all)
}
