//! Dynamic validation: run the program from `main` on many input vectors and
//! check every witness entry at its program point.
//!
//! Checks happen at these hooks:
//!
//! * `requires` when a contracted function is entered, before its first statement;
//! * `ensures` after a `return` evaluated its value, or when control falls off the body;
//! * loop invariants before every evaluation of the loop condition;
//! * location invariants before the statement runs.
//!
//! Entries sharing a hook are evaluated in witness order. The program's own
//! `assert` and `reach_error()` are checked too.
//!
//! # Exhaustive enumeration order
//!
//! The first `max_calls` nondeterministic values range over `lo..=hi`; later
//! calls draw pseudo-random values seeded by the first `max_calls` values.
//! Vectors are visited in lexicographic order of the values a run actually
//! consumed: each run starts from the previous vector with its last
//! incrementable position bumped and everything after it reset to `lo`.

mod machine;
mod state;

use serde::Serialize;
use serde_json::{json, Value};

pub use state::{evaluate_entry, Activation, EntryOutcome, ExecState};

use crate::csrc::{Pos, Program, StmtId};
use crate::diag::Diagnostic;
use crate::expr::ExprContext;
use crate::lint::{analyze, LintOptions, ResolvedEntry};
use crate::witness::WitnessSet;
use machine::{compile, execute, Compiled, Forced, Sampled};

pub const DEFAULT_LO: i32 = -8;
pub const DEFAULT_HI: i32 = 7;
pub const DEFAULT_MAX_CALLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputStrategy {
    Exhaustive { lo: i32, hi: i32, max_calls: usize },
    Randomized { seed: u64, samples: u64, lo: i32, hi: i32 },
}

impl Default for InputStrategy {
    fn default() -> Self {
        InputStrategy::Exhaustive {
            lo: DEFAULT_LO,
            hi: DEFAULT_HI,
            max_calls: DEFAULT_MAX_CALLS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Statements executed plus loop conditions evaluated, per run.
    pub step_limit: u64,
    pub call_depth: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            step_limit: 100_000,
            call_depth: 200,
        }
    }
}

/// How input vectors are distributed. Both modes produce identical verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Execution::Parallel;
        #[cfg(not(feature = "parallel"))]
        Execution::Sequential
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    pub strategy: InputStrategy,
    pub limits: Limits,
    pub execution: Execution,
    pub lint: LintOptions,
}

/// What failed on a violating run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Failure {
    Entry { index: usize, clause: ExprContext },
    Assert { stmt: StmtId, pos: Pos },
    ReachError { stmt: StmtId, pos: Pos },
}

impl Failure {
    pub fn entry_index(&self) -> Option<usize> {
        match self {
            Failure::Entry { index, .. } => Some(*index),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Failure::Entry { clause, .. } => clause.as_str(),
            Failure::Assert { .. } => "program_assert",
            Failure::ReachError { .. } => "reach_error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Terminated {
        exit_code: i32,
    },
    /// `abort()` ended the run; such executions are not checked further.
    Aborted,
    Violated(Failure),
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub point: String,
    pub event: String,
}

/// Everything observed on a single run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub outcome: Outcome,
    /// Values returned by the nondeterministic calls, in order.
    pub inputs: Vec<i32>,
    pub steps: u64,
    pub entries_evaluated: u64,
    pub trace: Vec<TraceEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Stats {
    pub inputs_explored: u64,
    pub entries_evaluated: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Violated {
        failure: Failure,
        input_vector: Vec<i32>,
        trace: Vec<TraceEvent>,
        stats: Stats,
    },
    /// No explored execution violated anything. Not a proof of validity.
    NoViolationFound { stats: Stats },
    Unknown {
        reason: String,
        input_vector: Option<Vec<i32>>,
        stats: Stats,
    },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Violated { .. } => "violated",
            Verdict::NoViolationFound { .. } => "no_violation_found",
            Verdict::Unknown { .. } => "unknown",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::NoViolationFound { .. } => 0,
            Verdict::Violated { .. } => 1,
            Verdict::Unknown { .. } => 2,
        }
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }

    pub fn failure(&self) -> Option<Failure> {
        match self {
            Verdict::Violated { failure, .. } => Some(*failure),
            _ => None,
        }
    }

    pub fn stats(&self) -> Stats {
        match self {
            Verdict::Violated { stats, .. } | Verdict::NoViolationFound { stats } | Verdict::Unknown { stats, .. } => {
                *stats
            }
        }
    }

    pub fn to_json(&self) -> Value {
        let mut out = json!({ "verdict": self.name(), "stats": self.stats() });
        match self {
            Verdict::Violated {
                failure,
                input_vector,
                trace,
                ..
            } => {
                out["entry_index"] = json!(failure.entry_index());
                out["clause"] = json!(failure.label());
                if let Failure::Assert { pos, .. } | Failure::ReachError { pos, .. } = failure {
                    out["position"] = json!({ "line": pos.line, "column": pos.column });
                }
                out["input_vector"] = json!(input_vector);
                out["trace"] = json!(trace);
            }
            Verdict::NoViolationFound { .. } => {}
            Verdict::Unknown {
                reason, input_vector, ..
            } => {
                out["reason"] = json!(reason);
                out["input_vector"] = json!(input_vector);
            }
        }
        out
    }
}

/// A program compiled with the checks of a lint-clean witness.
#[derive(Debug, Clone)]
pub struct Validator {
    code: Compiled,
    limits: Limits,
}

#[derive(Debug, Default)]
struct ChunkResult {
    runs: u64,
    evaluated: u64,
    violation: Option<(Vec<i32>, Failure)>,
    unknown: Option<(Vec<i32>, String)>,
}

impl ChunkResult {
    fn record(&mut self, r: RunReport) -> bool {
        self.runs += 1;
        self.evaluated += r.entries_evaluated;
        match r.outcome {
            Outcome::Violated(f) => {
                self.violation = Some((r.inputs, f));
                return true;
            }
            Outcome::Unknown(reason) if self.unknown.is_none() => self.unknown = Some((r.inputs, reason)),
            _ => {}
        }
        false
    }
}

impl Validator {
    /// Lints the pair and compiles it. Fails with the lint errors.
    pub fn new(p: &Program, w: &WitnessSet, lint: LintOptions, limits: Limits) -> Result<Self, Vec<Diagnostic>> {
        let analysis = analyze(w, p, lint);
        match analysis.resolved() {
            Some(entries) => Ok(Validator::from_resolved(p, &entries, limits)),
            None => Err(analysis.diagnostics.into_iter().filter(Diagnostic::is_error).collect()),
        }
    }

    pub fn from_resolved(p: &Program, entries: &[&ResolvedEntry], limits: Limits) -> Self {
        Validator {
            code: compile(p, entries),
            limits,
        }
    }

    /// Runs the program once on exactly `inputs` (later calls read 0).
    pub fn replay(&self, inputs: &[i32], trace: bool) -> RunReport {
        execute(&self.code, Forced::replay(inputs), self.limits, trace)
    }

    fn exhaustive_chunks(lo: i32, hi: i32, max_calls: usize) -> Vec<Vec<i32>> {
        let width = i64::from(hi) - i64::from(lo) + 1;
        let depth = if width * width <= 4096 {
            max_calls.min(2)
        } else {
            max_calls.min(1)
        };
        let mut chunks = vec![Vec::new()];
        for _ in 0..depth {
            chunks = chunks
                .into_iter()
                .flat_map(|c| {
                    (lo..=hi).map(move |v| {
                        let mut c = c.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        chunks
    }

    /// Visits every run whose first values equal `prefix`, in lexicographic
    /// order; stops early when `visit` returns true.
    fn explore_prefix(
        &self,
        prefix: &[i32],
        lo: i32,
        hi: i32,
        max_calls: usize,
        visit: &mut dyn FnMut(RunReport) -> bool,
    ) {
        let d = prefix.len();
        let mut forced = prefix.to_vec();
        loop {
            let report = execute(&self.code, Forced::new(&forced, lo, hi, max_calls), self.limits, false);
            let c = report.inputs.len().min(max_calls);
            if c < d {
                // shorter runs are reported once, under the prefix padded with `lo`
                if forced[c..d].iter().all(|&v| v == lo) {
                    visit(report);
                }
                return;
            }
            let mut next = report.inputs[..c].to_vec();
            if visit(report) {
                return;
            }
            loop {
                if next.len() == d {
                    return;
                }
                let last = next.len() - 1;
                if next[last] < hi {
                    next[last] += 1;
                    break;
                }
                next.pop();
            }
            forced = next;
        }
    }

    /// Every run of an exhaustive strategy, in enumeration order.
    pub fn enumerate(&self, strategy: InputStrategy) -> Vec<RunReport> {
        let mut out = Vec::new();
        match strategy {
            InputStrategy::Exhaustive { lo, hi, max_calls } => {
                for chunk in Self::exhaustive_chunks(lo, hi, max_calls) {
                    self.explore_prefix(&chunk, lo, hi, max_calls, &mut |r| {
                        out.push(r);
                        false
                    });
                }
            }
            InputStrategy::Randomized { seed, samples, lo, hi } => {
                for i in 0..samples {
                    out.push(execute(&self.code, Sampled::new(seed, i, lo, hi), self.limits, false));
                }
            }
        }
        out
    }

    pub fn run(&self, strategy: InputStrategy, execution: Execution) -> Verdict {
        let results: Vec<ChunkResult> = match strategy {
            InputStrategy::Exhaustive { lo, hi, max_calls } => {
                if lo > hi {
                    return Verdict::Unknown {
                        reason: format!("empty input domain [{lo}, {hi}]"),
                        input_vector: None,
                        stats: Stats::default(),
                    };
                }
                let chunks = Self::exhaustive_chunks(lo, hi, max_calls);
                map_units(execution, &chunks, |prefix| {
                    let mut res = ChunkResult::default();
                    self.explore_prefix(prefix, lo, hi, max_calls, &mut |r| res.record(r));
                    res
                })
            }
            InputStrategy::Randomized { seed, samples, lo, hi } => {
                if lo > hi {
                    return Verdict::Unknown {
                        reason: format!("empty input domain [{lo}, {hi}]"),
                        input_vector: None,
                        stats: Stats::default(),
                    };
                }
                let ids: Vec<u64> = (0..samples).collect();
                map_units(execution, &ids, |&i| {
                    let mut res = ChunkResult::default();
                    res.record(execute(&self.code, Sampled::new(seed, i, lo, hi), self.limits, false));
                    res
                })
            }
        };
        self.merge(results)
    }

    fn merge(&self, results: Vec<ChunkResult>) -> Verdict {
        let mut stats = Stats::default();
        let mut violation: Option<(Vec<i32>, Failure)> = None;
        let mut unknown: Option<(Vec<i32>, String)> = None;
        for r in results {
            stats.inputs_explored += r.runs;
            stats.entries_evaluated += r.evaluated;
            if let Some(v) = r.violation {
                if violation.as_ref().is_none_or(|best| v.0 < best.0) {
                    violation = Some(v);
                }
            }
            if let Some(u) = r.unknown {
                if unknown.as_ref().is_none_or(|best| u.0 < best.0) {
                    unknown = Some(u);
                }
            }
        }
        if let Some((inputs, failure)) = violation {
            let replay = self.replay(&inputs, true);
            debug_assert_eq!(replay.outcome, Outcome::Violated(failure));
            return Verdict::Violated {
                failure,
                input_vector: inputs,
                trace: replay.trace,
                stats,
            };
        }
        match unknown {
            Some((inputs, reason)) => Verdict::Unknown {
                reason,
                input_vector: Some(inputs),
                stats,
            },
            None => Verdict::NoViolationFound { stats },
        }
    }
}

fn map_units<T: Sync, R: Send>(execution: Execution, units: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    match execution {
        Execution::Sequential => units.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            units.par_iter().map(f).collect()
        }
    }
}

/// Validates `w` against `p`. A pair that does not lint clean yields
/// `unknown`.
pub fn validate(p: &Program, w: &WitnessSet, options: &ValidateOptions) -> Verdict {
    match Validator::new(p, w, options.lint, options.limits) {
        Ok(v) => v.run(options.strategy, options.execution),
        Err(diags) => Verdict::Unknown {
            reason: format!(
                "witness is not well-formed: {}",
                diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
            ),
            input_vector: None,
            stats: Stats::default(),
        },
    }
}
