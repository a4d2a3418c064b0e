//! Command-line front end: load a program (and optionally an environment),
//! run it under one of the five interpretation-loop variants, and emit the
//! result plus the trace in a human- or machine-readable format.
//!
//! Exit codes: 0 success, 1 evaluation error (or a failed `--verify`),
//! 2 program parse error, 3 configuration error.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, ValueEnum};

use reflexion::render::{human_lines, json_line};
use reflexion::{eval_reflexive, read_all, Env, Expr, Limits, Mode};

const EXIT_EVAL: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "reflexion", version, about)]
struct Args {
    /// Program file holding exactly one expression
    program: PathBuf,

    /// Interpretation-loop variant to run
    #[arg(long, value_enum, default_value_t = ModeArg::Standard)]
    mode: ModeArg,

    /// Environment file: one list of (symbol value) bindings
    #[arg(long)]
    env: Option<PathBuf>,

    /// Trace output format
    #[arg(long, value_enum, default_value_t = FormatArg::Human)]
    format: FormatArg,

    /// Evaluator recursion bound
    #[arg(long, default_value_t = 10_000)]
    max_depth: usize,

    /// Write trace records to this file instead of standard output
    #[arg(long)]
    trace_out: Option<PathBuf>,

    /// Run in reflexion mode and diff the human-format trace against this
    /// expected file, reporting the first divergence by step index
    #[arg(long, value_name = "EXPECTED")]
    verify: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Standard,
    Tracing,
    Mirroring,
    Augmentation,
    Reflexion,
}

impl From<ModeArg> for Mode {
    fn from(arg: ModeArg) -> Mode {
        match arg {
            ModeArg::Standard => Mode::Standard,
            ModeArg::Tracing => Mode::Tracing,
            ModeArg::Mirroring => Mode::Mirroring,
            ModeArg::Augmentation => Mode::Augmentation,
            ModeArg::Reflexion => Mode::Reflexion,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Human,
    Lines,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl fmt::Display) -> CliError {
        CliError { code: EXIT_CONFIG, message: format!("config error: {message}") }
    }

    fn parse(message: impl fmt::Display) -> CliError {
        CliError { code: EXIT_PARSE, message: format!("parse error: {message}") }
    }

    fn eval(message: impl fmt::Display) -> CliError {
        CliError { code: EXIT_EVAL, message: format!("eval error: {message}") }
    }

    fn verify(message: impl fmt::Display) -> CliError {
        CliError { code: EXIT_EVAL, message: format!("verify: FAIL: {message}") }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    let program = load_program(&args.program)?;
    let env = match &args.env {
        Some(path) => load_env(path)?,
        None => Env::empty(),
    };
    let limits = Limits { max_depth: args.max_depth };

    match &args.verify {
        Some(expected) => verify_transcript(&program, &env, expected, &limits),
        None => run_program(args, &program, &env, &limits),
    }
}

fn load_program(path: &Path) -> Result<Expr, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let forms = read_all(&text)
        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    match <[Expr; 1]>::try_from(forms) {
        Ok([form]) => Ok(form),
        Err(forms) => Err(CliError::parse(format!(
            "{}: expected exactly one expression, found {}",
            path.display(),
            forms.len()
        ))),
    }
}

fn load_env(path: &Path) -> Result<Env, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let forms = read_all(&text)
        .map_err(|e| CliError::config(format!("malformed environment file {}: {e}", path.display())))?;
    let [form] = &forms[..] else {
        return Err(CliError::config(format!(
            "malformed environment file {}: expected one binding list, found {} forms",
            path.display(),
            forms.len()
        )));
    };
    Env::from_expr(form)
        .map_err(|e| CliError::config(format!("malformed environment file {}: {e}", path.display())))
}

fn run_program(args: &Args, program: &Expr, env: &Env, limits: &Limits) -> Result<(), CliError> {
    let mode = Mode::from(args.mode);
    let (result, trace) = eval_reflexive(program, env, mode, None, limits);

    if mode >= Mode::Tracing {
        let lines: Vec<String> = match args.format {
            FormatArg::Human => human_lines(&trace),
            FormatArg::Lines => trace.iter().map(json_line).collect(),
        };
        emit_trace(&lines, args.trace_out.as_deref())?;
    }

    let value = result.map_err(CliError::eval)?;
    println!("{value}");
    Ok(())
}

fn emit_trace(lines: &[String], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut text = lines.join("\n");
            if !text.is_empty() {
                text.push('\n');
            }
            fs::write(path, text)
                .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            for line in lines {
                println!("{line}");
            }
            Ok(())
        }
    }
}

fn verify_transcript(
    program: &Expr,
    env: &Env,
    expected_path: &Path,
    limits: &Limits,
) -> Result<(), CliError> {
    let expected_text = fs::read_to_string(expected_path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", expected_path.display())))?;
    let expected: Vec<&str> = expected_text.lines().collect();

    let (result, trace) = eval_reflexive(program, env, Mode::Reflexion, None, limits);
    result.map_err(CliError::eval)?;
    let actual = human_lines(&trace);

    for (index, (want, got)) in expected.iter().zip(&actual).enumerate() {
        if want != got {
            return Err(CliError::verify(format!(
                "divergence at step {index}\n  expected: {want}\n  actual:   {got}"
            )));
        }
    }
    if expected.len() != actual.len() {
        return Err(CliError::verify(format!(
            "divergence at step {}: expected {} trace lines, got {}",
            expected.len().min(actual.len()),
            expected.len(),
            actual.len()
        )));
    }
    println!("verify: PASS ({} steps)", actual.len());
    Ok(())
}
