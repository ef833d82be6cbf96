use std::collections::BTreeMap;

use crate::csrc::ProgramPoint;
use crate::expr::{evaluate, EvalEnv, EvalFault, ExprContext};
use crate::lint::ResolvedEntry;

/// One function activation as seen by entry evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Activation {
    pub function: String,
    pub parameters: Vec<String>,
    /// Current values of parameters and locals in scope.
    pub locals: BTreeMap<String, i32>,
    /// Globals and parameters captured before the first body statement.
    pub pre: BTreeMap<String, i32>,
    /// The returned value, at a return point of a non-void function.
    pub result: Option<i32>,
}

/// A map-based view of an execution state.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExecState {
    pub globals: BTreeMap<String, i32>,
    pub stack: Vec<Activation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntryOutcome {
    Pass,
    Fail,
    Fault(EvalFault),
}

/// Evaluates the clause of `entry` that applies at `point` against the top
/// activation of `state`: `requires` at a function entry, `ensures` at a
/// return point, the invariant elsewhere. An entry without a clause for the
/// point passes.
pub fn evaluate_entry(entry: &ResolvedEntry, state: &ExecState, point: &ProgramPoint) -> EntryOutcome {
    let context = match point {
        ProgramPoint::FunctionEntry { .. } => ExprContext::Requires,
        ProgramPoint::ReturnPoint { .. } => ExprContext::Ensures,
        ProgramPoint::LoopHead { .. } | ProgramPoint::BeforeStatement { .. } => ExprContext::Invariant,
    };
    let Some(expr) = entry.clause(context) else {
        return EntryOutcome::Pass;
    };
    let top = state.stack.last().cloned().unwrap_or_default();
    let mut current = state.globals.clone();
    current.extend(top.locals);
    let env = EvalEnv {
        current,
        pre: top.pre,
        result: if context == ExprContext::Ensures {
            top.result
        } else {
            None
        },
        parameters: top.parameters.into_iter().collect(),
    };
    match evaluate(expr, &env, context) {
        Ok(0) => EntryOutcome::Fail,
        Ok(_) => EntryOutcome::Pass,
        Err(f) => EntryOutcome::Fault(f),
    }
}
