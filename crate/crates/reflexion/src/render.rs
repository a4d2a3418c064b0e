//! Trace output formats.
//!
//! The human format is one `(input env) -> output` line per record, the
//! same line the built-in mirroring hook emits. The machine format is one
//! JSON object per line with stable field names; every expression-valued
//! field is the canonical printed form, so the records stay host-neutral
//! and re-render to the human format exactly.

use serde::{Deserialize, Serialize};

use crate::eval::Env;
use crate::reflexive::{StepRecord, Trace};
use crate::sexpr::{print, Expr};

/// The `(input env) -> output` line for one step.
pub fn step_line(input: &Expr, env: &Env, output: &Expr) -> String {
    format!("({} {}) -> {}", input, env.to_expr(), output)
}

/// Human-format line for a record.
pub fn human_line(record: &StepRecord) -> String {
    step_line(&record.input_expr, &record.input_env, &record.output_expr)
}

/// Human-format trace: one line per record, in step order.
pub fn human_lines(trace: &Trace) -> Vec<String> {
    trace.iter().map(human_line).collect()
}

/// One machine-format record. Field values are canonical-form strings;
/// `mirror` and `snapshot` are null in modes that do not populate them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub index: usize,
    pub input: String,
    pub env: String,
    pub output: String,
    pub mirror: Option<String>,
    pub snapshot: Option<LineSnapshot>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSnapshot {
    pub program: String,
    pub env: String,
    pub completed: usize,
}

impl LineRecord {
    pub fn from_record(record: &StepRecord) -> LineRecord {
        LineRecord {
            index: record.step_index,
            input: print(&record.input_expr),
            env: print(&record.input_env.to_expr()),
            output: print(&record.output_expr),
            mirror: record.mirror_output.as_ref().map(print),
            snapshot: record.global_snapshot.as_ref().map(|s| LineSnapshot {
                program: print(&s.top_level_expr),
                env: print(&s.env_at_step.to_expr()),
                completed: s.completed_steps,
            }),
        }
    }

    /// Re-renders a machine-format record as its human-format line.
    pub fn to_human_line(&self) -> String {
        format!("({} {}) -> {}", self.input, self.env, self.output)
    }
}

/// Machine-format line for a record.
pub fn json_line(record: &StepRecord) -> String {
    serde_json::to_string(&LineRecord::from_record(record)).expect("record serializes")
}

/// Parses one machine-format line.
pub fn parse_json_line(line: &str) -> Result<LineRecord, serde_json::Error> {
    serde_json::from_str(line)
}
