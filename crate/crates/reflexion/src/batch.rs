//! Batch evaluation over a corpus of programs.
//!
//! A single run is strictly sequential — every upper step follows its lower
//! step inside one loop occurrence — but distinct runs are independent, so
//! a corpus fans out across threads. With the default `parallel` feature
//! [`run_programs`] uses a rayon pool; without it, it falls back to
//! [`run_programs_sequential`]. Both produce identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::eval::{Env, Limits};
use crate::reflexive::{eval_reflexive, Mode, ReflexiveError, Trace};
use crate::sexpr::Expr;

/// Outcome of one program in a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgramRun {
    pub result: Result<Expr, ReflexiveError>,
    pub trace: Trace,
}

fn run_one(program: &Expr, env: &Env, mode: Mode, limits: &Limits) -> ProgramRun {
    let (result, trace) = eval_reflexive(program, env, mode, None, limits);
    ProgramRun { result, trace }
}

/// Runs every program under the given mode, in parallel when the
/// `parallel` feature is enabled.
pub fn run_programs(programs: &[Expr], env: &Env, mode: Mode, limits: &Limits) -> Vec<ProgramRun> {
    #[cfg(feature = "parallel")]
    {
        programs
            .par_iter()
            .map(|program| run_one(program, env, mode, limits))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_programs_sequential(programs, env, mode, limits)
    }
}

/// Single-threaded batch evaluation; the fallback behind [`run_programs`]
/// and the baseline the benchmarks compare against.
pub fn run_programs_sequential(
    programs: &[Expr],
    env: &Env,
    mode: Mode,
    limits: &Limits,
) -> Vec<ProgramRun> {
    programs
        .iter()
        .map(|program| run_one(program, env, mode, limits))
        .collect()
}
