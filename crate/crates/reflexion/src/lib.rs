//! A minimal s-expression interpreter whose interpretation loop can be
//! enriched, one component at a time, into a fully self-monitoring loop.
//!
//! The five loop variants are described by [`Mode`]:
//!
//! * `Standard` — plain evaluation, nothing recorded.
//! * `Tracing` — every loop occurrence reifies the current instruction and
//!   environment into a [`StepRecord`].
//! * `Mirroring` — each recorded step is re-executed with the standard
//!   evaluator and the duplicate result is stored alongside the original.
//! * `Augmentation` — a [`StepHook`] runs after every step, over the whole
//!   trace so far, and attaches its emissions to the current record.
//! * `Reflexion` — each record additionally carries a snapshot of the entire
//!   program under execution.
//!
//! Enriching the loop never changes the result of the program being run:
//! for any program on which [`eval_core`] succeeds, [`eval_reflexive`]
//! returns a structurally equal value in every mode.

pub mod batch;
pub mod corpus;
pub mod eval;
pub mod reflexive;
pub mod render;
pub mod sexpr;

pub use eval::{
    and, append, assoc, eval_core, eval_core_instrumented, evcon, evlis, list2, not, null, pair,
    Env, EvalError, EvalErrorKind, Limits, MalformedEnv,
};
pub use reflexive::{
    augment, builtin_mirror_hook, eval_reflexive, global_introspect, local_introspect,
    mirror_step, Emission, EmissionKind, EmissionPayload, HookError, MirrorHook, Mode,
    ProgramSnapshot, ReflexiveError, RunState, StepHook, StepRecord, Trace,
};
pub use sexpr::{print, read, read_all, Expr, ReadError, ReadErrorKind, SourceSpan, Symbol};
