//! Command-line driver. [`run`] is the whole program; `main` only forwards the
//! process arguments and exit code.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use witness_contracts::csrc::{parse_program, Program};
use witness_contracts::diag::{Diagnostic, Severity};
use witness_contracts::instrument::{emit_c_with, instrument_with, AssertStyle, EmitOptions};
use witness_contracts::lint::{lint_witness_with, LintOptions};
use witness_contracts::lower::lower_with;
use witness_contracts::validate::{Execution, InputStrategy, Limits, ValidateOptions, Validator, Verdict};
use witness_contracts::witness::{parse_named, serialize_witness, ColumnBase, ParseMode, ParseOptions, WitnessSet};

pub const EXIT_LINT: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "witness-contracts",
    version,
    about = "Check, instrument, validate and lower witnesses with function contracts"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Downgrade unknown witness keys to warnings.
    #[arg(long, global = true)]
    lenient: bool,
    /// Witness columns count from 0.
    #[arg(long, global = true)]
    zero_based_columns: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Inputs {
    witness: PathBuf,
    program: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report schema and well-formedness findings.
    Lint {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Emit the program with the witness turned into assertions.
    Instrument {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Emit `if (!(e)) reach_error();` instead of `assert(e);`.
        #[arg(long)]
        reach_error: bool,
    },
    /// Execute the program on many inputs, checking every entry.
    Validate {
        #[command(flatten)]
        inputs: Inputs,
        /// Enumerate every vector in [LO, HI] for the first MAXCALLS nondet calls.
        #[arg(long, num_args = 3, value_names = ["LO", "HI", "MAXCALLS"], allow_negative_numbers = true, conflicts_with = "random")]
        exhaustive: Option<Vec<i64>>,
        /// N pseudo-random vectors from SEED.
        #[arg(long, num_args = 2, value_names = ["SEED", "N"])]
        random: Option<Vec<u64>>,
        #[arg(long)]
        step_limit: Option<u64>,
        /// Disable data-parallel exploration.
        #[arg(long)]
        sequential: bool,
    },
    /// Translate to format 2.0 and report what cannot be expressed.
    Lower {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        residue: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Parsed inputs plus non-fatal findings, or every parse error.
type Loaded = Result<(WitnessSet, Program, Vec<Diagnostic>), Vec<Diagnostic>>;

struct Ctx<'a> {
    format: Format,
    color: bool,
    parse: ParseOptions,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

/// Runs the driver on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let color = std::env::var("WITNESS_CONTRACTS_COLOR").is_ok_and(|v| v == "1");
    let parse = ParseOptions {
        mode: if cli.lenient {
            ParseMode::Lenient
        } else {
            ParseMode::Strict
        },
        column_base: if cli.zero_based_columns {
            ColumnBase::ZeroBased
        } else {
            ColumnBase::OneBased
        },
    };
    let mut ctx = Ctx {
        format: cli.format,
        color,
        parse,
        out,
        err,
    };
    match ctx.dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(ctx.err, "witness-contracts: {}", f.message);
            f.code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn io(e: std::io::Error) -> Failure {
    usage(format!("output error: {e}"))
}

impl Ctx<'_> {
    fn lint_options(&self) -> LintOptions {
        LintOptions {
            column_base: self.parse.column_base,
        }
    }

    fn dispatch(&mut self, command: Command) -> Result<i32, Failure> {
        match command {
            Command::Lint { inputs } => self.lint(&inputs),
            Command::Instrument {
                inputs,
                output,
                reach_error,
            } => self.instrument(&inputs, output.as_deref(), reach_error),
            Command::Validate {
                inputs,
                exhaustive,
                random,
                step_limit,
                sequential,
            } => {
                let strategy = match (exhaustive, random) {
                    (Some(v), _) => {
                        let narrow = |x: i64| {
                            i32::try_from(x).map_err(|_| usage(format!("--exhaustive bound {x} out of range")))
                        };
                        let (lo, hi) = (narrow(v[0])?, narrow(v[1])?);
                        if lo > hi {
                            return Err(usage("--exhaustive needs LO <= HI"));
                        }
                        let max_calls =
                            usize::try_from(v[2]).map_err(|_| usage("--exhaustive MAXCALLS must be >= 0"))?;
                        InputStrategy::Exhaustive { lo, hi, max_calls }
                    }
                    (None, Some(v)) => InputStrategy::Randomized {
                        seed: v[0],
                        samples: v[1],
                        lo: witness_contracts::validate::DEFAULT_LO,
                        hi: witness_contracts::validate::DEFAULT_HI,
                    },
                    (None, None) => InputStrategy::default(),
                };
                let mut limits = Limits::default();
                if let Some(n) = step_limit {
                    limits.step_limit = n;
                }
                self.validate(&inputs, strategy, limits, sequential)
            }
            Command::Lower {
                inputs,
                output,
                residue,
            } => self.lower(&inputs, output.as_deref(), residue.as_deref()),
        }
    }

    /// Parses both inputs. Parse failures come back as diagnostics, like lint findings.
    fn load(&self, inputs: &Inputs) -> Result<Loaded, Failure> {
        let wtext = read(&inputs.witness)?;
        let ptext = read(&inputs.program)?;
        let wname = inputs.witness.display().to_string();
        let pname = inputs.program.display().to_string();
        let program = parse_program(&ptext)
            .map(|p| p.with_file_name(pname.clone()))
            .map_err(|ds| {
                ds.into_iter()
                    .map(|mut d| {
                        if let Some(pos) = &mut d.position {
                            pos.file = pname.clone();
                        }
                        d
                    })
                    .collect::<Vec<_>>()
            });
        let witness = parse_named(&wtext, &wname, self.parse);
        Ok(match (witness, program) {
            (Ok(w), Ok(p)) => Ok((w.witness, p, w.warnings)),
            (Err(mut a), Err(b)) => {
                a.extend(b);
                Err(a)
            }
            (Err(a), _) | (_, Err(a)) => Err(a),
        })
    }

    fn print_diagnostics(&mut self, diags: &[Diagnostic]) -> Result<(), Failure> {
        match self.format {
            Format::Json => {
                let text = serde_json::to_string_pretty(diags).expect("diagnostics serialize");
                writeln!(self.out, "{text}").map_err(io)
            }
            Format::Text => {
                for d in diags {
                    let line = if self.color {
                        let c = match d.severity {
                            Severity::Error => "\x1b[31m",
                            Severity::Warning => "\x1b[33m",
                        };
                        format!("{c}{d}\x1b[0m")
                    } else {
                        d.to_string()
                    };
                    writeln!(self.out, "{line}").map_err(io)?;
                }
                Ok(())
            }
        }
    }

    /// Loads and lints; on findings with errors, prints them and yields the lint exit code.
    fn checked(&mut self, inputs: &Inputs) -> Result<Result<(WitnessSet, Program), i32>, Failure> {
        let (w, p, mut diags) = match self.load(inputs)? {
            Ok(x) => x,
            Err(diags) => {
                self.print_diagnostics(&diags)?;
                return Ok(Err(EXIT_LINT));
            }
        };
        diags.extend(lint_witness_with(&w, &p, self.lint_options()));
        if diags.iter().any(Diagnostic::is_error) {
            self.print_diagnostics(&diags)?;
            return Ok(Err(EXIT_LINT));
        }
        if !diags.is_empty() && self.format == Format::Text {
            for d in &diags {
                writeln!(self.err, "{d}").map_err(io)?;
            }
        }
        Ok(Ok((w, p)))
    }

    fn lint(&mut self, inputs: &Inputs) -> Result<i32, Failure> {
        let (w, p, mut diags) = match self.load(inputs)? {
            Ok(x) => x,
            Err(diags) => {
                self.print_diagnostics(&diags)?;
                return Ok(EXIT_LINT);
            }
        };
        diags.extend(lint_witness_with(&w, &p, self.lint_options()));
        if self.format == Format::Json || !diags.is_empty() {
            self.print_diagnostics(&diags)?;
        }
        Ok(if diags.is_empty() { 0 } else { EXIT_LINT })
    }

    fn instrument(&mut self, inputs: &Inputs, output: Option<&Path>, reach_error: bool) -> Result<i32, Failure> {
        let (w, p) = match self.checked(inputs)? {
            Ok(x) => x,
            Err(code) => return Ok(code),
        };
        let inst =
            instrument_with(&p, &w, self.lint_options()).map_err(|ds| usage(format!("{} lint errors", ds.len())))?;
        let style = if reach_error {
            AssertStyle::ReachError
        } else {
            AssertStyle::Assert
        };
        let text = emit_c_with(
            &inst.program,
            EmitOptions {
                style,
                ..EmitOptions::default()
            },
        );
        match output {
            Some(path) => {
                write(path, &text)?;
                if self.format == Format::Json {
                    let v = json!({ "output": path.display().to_string(), "asserts": inst.origins.len() });
                    writeln!(self.out, "{v}").map_err(io)?;
                }
            }
            None => self.out.write_all(text.as_bytes()).map_err(io)?,
        }
        Ok(0)
    }

    fn validate(
        &mut self,
        inputs: &Inputs,
        strategy: InputStrategy,
        limits: Limits,
        sequential: bool,
    ) -> Result<i32, Failure> {
        let (w, p) = match self.checked(inputs)? {
            Ok(x) => x,
            Err(code) => return Ok(code),
        };
        let execution = if sequential {
            Execution::Sequential
        } else {
            Execution::default()
        };
        let options = ValidateOptions {
            strategy,
            limits,
            execution,
            lint: self.lint_options(),
        };
        let verdict = match Validator::new(&p, &w, options.lint, options.limits) {
            Ok(v) => v.run(options.strategy, options.execution),
            Err(_) => return Ok(EXIT_LINT),
        };
        match self.format {
            Format::Json => {
                let text = serde_json::to_string_pretty(&verdict.to_json()).expect("verdict serializes");
                writeln!(self.out, "{text}").map_err(io)?;
            }
            Format::Text => self.print_verdict(&verdict)?,
        }
        Ok(verdict.exit_code())
    }

    fn print_verdict(&mut self, verdict: &Verdict) -> Result<(), Failure> {
        let name = verdict.name();
        let shown = match (self.color, verdict) {
            (true, Verdict::Violated { .. }) => format!("\x1b[31m{name}\x1b[0m"),
            (true, Verdict::NoViolationFound { .. }) => format!("\x1b[32m{name}\x1b[0m"),
            (true, Verdict::Unknown { .. }) => format!("\x1b[33m{name}\x1b[0m"),
            (false, _) => name.to_owned(),
        };
        let o = &mut *self.out;
        writeln!(o, "verdict: {shown}").map_err(io)?;
        match verdict {
            Verdict::Violated {
                failure,
                input_vector,
                trace,
                ..
            } => {
                match failure.entry_index() {
                    Some(i) => writeln!(o, "failed: entry {i} ({})", failure.label()),
                    None => writeln!(o, "failed: {}", failure.label()),
                }
                .map_err(io)?;
                writeln!(o, "input vector: {input_vector:?}").map_err(io)?;
                writeln!(o, "trace:").map_err(io)?;
                for ev in trace {
                    writeln!(o, "  {:<24} {}", ev.point, ev.event).map_err(io)?;
                }
            }
            Verdict::Unknown {
                reason, input_vector, ..
            } => {
                writeln!(o, "reason: {reason}").map_err(io)?;
                if let Some(v) = input_vector {
                    writeln!(o, "input vector: {v:?}").map_err(io)?;
                }
            }
            Verdict::NoViolationFound { .. } => {}
        }
        let s = verdict.stats();
        writeln!(
            o,
            "inputs explored: {}, entries evaluated: {}",
            s.inputs_explored, s.entries_evaluated
        )
        .map_err(io)
    }

    fn lower(&mut self, inputs: &Inputs, output: Option<&Path>, residue: Option<&Path>) -> Result<i32, Failure> {
        let (w, p) = match self.checked(inputs)? {
            Ok(x) => x,
            Err(code) => return Ok(code),
        };
        let lowered =
            lower_with(&w, &p, self.lint_options()).map_err(|ds| usage(format!("{} lint errors", ds.len())))?;
        let yaml = serialize_witness(&lowered.witness);
        let residue_json = lowered.residue.to_json();
        let residue_text = serde_json::to_string_pretty(&residue_json).expect("residue serializes");
        if let Some(path) = output {
            write(path, &yaml)?;
        }
        if let Some(path) = residue {
            write(path, &format!("{residue_text}\n"))?;
        }
        match self.format {
            Format::Json => {
                let mut v = json!({ "entries": lowered.witness.entries.len(), "residue": residue_json["residue"] });
                if output.is_none() {
                    v["witness"] = json!(yaml);
                }
                let text = serde_json::to_string_pretty(&v).expect("summary serializes");
                writeln!(self.out, "{text}").map_err(io)?;
            }
            Format::Text => {
                if output.is_none() {
                    self.out.write_all(yaml.as_bytes()).map_err(io)?;
                }
                if residue.is_none() {
                    for r in &lowered.residue.residue {
                        let pos = &r.position;
                        writeln!(
                            self.err,
                            "{}:{}:{}: residue [{}] entry {} {}: {}",
                            pos.file,
                            pos.line,
                            pos.column,
                            r.reason.code(),
                            r.entry_index,
                            r.clause,
                            r.expression
                        )
                        .map_err(io)?;
                    }
                }
            }
        }
        Ok(0)
    }
}
