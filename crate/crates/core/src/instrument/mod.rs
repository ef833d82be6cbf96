//! Source-to-source instrumentation: every witness entry becomes `assert`
//! statements over ghost locals, so that an ordinary run of the program
//! checks the witness.
//!
//! Per function with entries:
//!
//! * `int __wit_pre_<x> = x;` at the top of the body for each `x` read in its
//!   pre-state (`\old(x)`, `\at(x, Pre)`, or a parameter inside `ensures`);
//! * `assert(requires)` after the ghosts;
//! * `return e;` becomes `{ int __wit_result = e; assert(ensures'); return __wit_result; }`;
//! * a loop invariant is asserted before the loop and at the end of its body;
//! * a location invariant is asserted right before its statement.

mod emit;

use std::collections::{BTreeMap, BTreeSet};

pub use emit::{emit_c, emit_c_with, AssertStyle, EmitOptions};

use crate::csrc::{
    BlockOrigin, Declarator, Function, Item, Program, ProgramPoint, ReturnType, Rhs, Stmt, StmtId, StmtKind,
    GHOST_PREFIX,
};
use crate::diag::Diagnostic;
use crate::expr::{free_variables, Expr, ExprContext, VarUse};
use crate::lint::{analyze, LintOptions, ResolvedEntry};
use crate::witness::{EntryKind, WitnessSet};

pub const RESULT_GHOST: &str = "__wit_result";

pub fn pre_ghost(name: &str) -> String {
    format!("{GHOST_PREFIX}pre_{name}")
}

/// Which witness clause an inserted `assert` checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AssertOrigin {
    pub entry: usize,
    pub clause: ExprContext,
}

#[derive(Debug, Clone)]
pub struct Instrumented {
    pub program: Program,
    /// Statement id of each inserted `assert`. Asserts absent from the map
    /// belong to the original program.
    pub origins: BTreeMap<StmtId, AssertOrigin>,
}

/// Instruments `p` with the entries of `w`. Fails with the lint diagnostics
/// when the pair does not lint clean.
pub fn instrument_program(p: &Program, w: &WitnessSet) -> Result<Instrumented, Vec<Diagnostic>> {
    instrument_with(p, w, LintOptions::default())
}

pub fn instrument_with(p: &Program, w: &WitnessSet, options: LintOptions) -> Result<Instrumented, Vec<Diagnostic>> {
    let analysis = analyze(w, p, options);
    let Some(entries) = analysis.resolved() else {
        return Err(analysis.diagnostics.into_iter().filter(Diagnostic::is_error).collect());
    };
    Ok(instrument_resolved(p, &entries))
}

/// Instruments with entries that were already resolved against `p`.
pub fn instrument_resolved(p: &Program, entries: &[&ResolvedEntry]) -> Instrumented {
    let mut ids = IdSource {
        next: p.max_stmt_id().0,
        origins: BTreeMap::new(),
    };
    let items = p
        .items
        .iter()
        .map(|item| match item {
            Item::Function(f) => {
                let mine: Vec<&ResolvedEntry> = entries.iter().copied().filter(|e| e.function() == f.name).collect();
                if mine.is_empty() {
                    Item::Function(f.clone())
                } else {
                    Item::Function(FunctionPlan::new(f, &mine).apply(f, &mut ids))
                }
            }
            other => other.clone(),
        })
        .collect();
    Instrumented {
        program: Program {
            items,
            file_name: p.file_name.clone(),
        },
        origins: ids.origins,
    }
}

struct IdSource {
    next: u32,
    origins: BTreeMap<StmtId, AssertOrigin>,
}

impl IdSource {
    fn fresh(&mut self) -> StmtId {
        self.next += 1;
        StmtId(self.next)
    }

    fn stmt(&mut self, like: &Stmt, kind: StmtKind) -> Stmt {
        Stmt {
            id: self.fresh(),
            pos: like.pos,
            kind,
        }
    }

    fn assert(&mut self, like: &Stmt, check: &Check) -> Stmt {
        let s = self.stmt(like, StmtKind::Assert(check.expr.clone()));
        self.origins.insert(s.id, check.origin);
        s
    }

    fn block(&mut self, like: &Stmt, stmts: Vec<Stmt>) -> Stmt {
        self.stmt(
            like,
            StmtKind::Block {
                stmts,
                origin: BlockOrigin::Synthetic,
            },
        )
    }
}

#[derive(Clone)]
struct Check {
    origin: AssertOrigin,
    expr: Expr,
}

#[derive(Default)]
struct FunctionPlan {
    ghosts: BTreeSet<String>,
    requires: Vec<Check>,
    ensures: Vec<Check>,
    loops: BTreeMap<StmtId, Vec<Check>>,
    locations: BTreeMap<StmtId, Vec<Check>>,
}

impl FunctionPlan {
    fn new(f: &Function, entries: &[&ResolvedEntry]) -> Self {
        let mut plan = FunctionPlan::default();
        let is_param = |x: &str| f.params.iter().any(|p| p == x);
        for e in entries {
            for c in &e.clauses {
                for u in free_variables(&c.expr) {
                    match u {
                        VarUse::Pre(x) => {
                            plan.ghosts.insert(x);
                        }
                        VarUse::Current(x) if c.context == ExprContext::Ensures && is_param(&x) => {
                            plan.ghosts.insert(x);
                        }
                        _ => {}
                    }
                }
                if c.expr.is_true_literal() {
                    continue;
                }
                let check = Check {
                    origin: AssertOrigin {
                        entry: e.index,
                        clause: c.context,
                    },
                    expr: rewrite(&c.expr, c.context, f),
                };
                match (&e.point, c.context) {
                    (_, ExprContext::Requires) => plan.requires.push(check),
                    (_, ExprContext::Ensures) => plan.ensures.push(check),
                    (ProgramPoint::LoopHead { stmt, .. }, _) => plan.loops.entry(*stmt).or_default().push(check),
                    (ProgramPoint::BeforeStatement { stmt, .. }, _) => {
                        plan.locations.entry(*stmt).or_default().push(check)
                    }
                    _ => unreachable!("invariant anchored at {}", e.point),
                }
            }
            debug_assert!(e.kind != EntryKind::FunctionContract || e.clauses.len() == 2);
        }
        plan
    }

    fn apply(&self, f: &Function, ids: &mut IdSource) -> Function {
        let anchor = f.body.first().cloned().unwrap_or(Stmt {
            id: StmtId(0),
            pos: f.pos,
            kind: StmtKind::Empty,
        });
        let mut body = Vec::new();
        for x in &self.ghosts {
            body.push(ids.stmt(
                &anchor,
                StmtKind::Decl(vec![Declarator {
                    name: pre_ghost(x),
                    init: Some(Rhs::Expr(Expr::Var(x.clone()))),
                }]),
            ));
        }
        for c in &self.requires {
            body.push(ids.assert(&anchor, c));
        }
        body.extend(self.list(f, &f.body, ids));
        if !self.ensures.is_empty() && f.falls_off_end() {
            let last = f.body.last().unwrap_or(&anchor);
            match f.return_type {
                ReturnType::Void => {
                    let asserts = self.ensures.iter().map(|c| ids.assert(last, c)).collect();
                    body.push(ids.block(last, asserts));
                }
                // falling off `main` returns 0; other int functions fault there
                ReturnType::Int if f.name == "main" => {
                    body.push(self.returning(last, Some(Rhs::Expr(Expr::Int(0))), ids));
                }
                ReturnType::Int => {}
            }
        }
        Function { body, ..f.clone() }
    }

    fn list(&self, f: &Function, stmts: &[Stmt], ids: &mut IdSource) -> Vec<Stmt> {
        let mut out = Vec::new();
        for s in stmts {
            out.extend(self.located(f, s, ids));
        }
        out
    }

    /// The statement preceded by its location asserts.
    fn located(&self, f: &Function, s: &Stmt, ids: &mut IdSource) -> Vec<Stmt> {
        let mut out = Vec::new();
        if let Some(checks) = self.locations.get(&s.id) {
            out.extend(checks.iter().map(|c| ids.assert(s, c)));
        }
        out.extend(self.stmt(f, s, ids));
        out
    }

    fn single(&self, f: &Function, s: &Stmt, ids: &mut IdSource) -> Stmt {
        let mut v = self.located(f, s, ids);
        if v.len() == 1 {
            v.pop().expect("one statement")
        } else {
            ids.block(s, v)
        }
    }

    fn returning(&self, s: &Stmt, value: Option<Rhs>, ids: &mut IdSource) -> Stmt {
        let mut stmts = Vec::new();
        let ret = match value {
            Some(v) => {
                stmts.push(ids.stmt(
                    s,
                    StmtKind::Decl(vec![Declarator {
                        name: RESULT_GHOST.to_owned(),
                        init: Some(v),
                    }]),
                ));
                Some(Rhs::Expr(Expr::var(RESULT_GHOST)))
            }
            None => None,
        };
        stmts.extend(self.ensures.iter().map(|c| ids.assert(s, c)));
        stmts.push(Stmt {
            id: s.id,
            pos: s.pos,
            kind: StmtKind::Return(ret),
        });
        ids.block(s, stmts)
    }

    fn stmt(&self, f: &Function, s: &Stmt, ids: &mut IdSource) -> Vec<Stmt> {
        let kind = match &s.kind {
            StmtKind::Return(value) if !self.ensures.is_empty() => {
                return vec![self.returning(s, value.clone(), ids)];
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => StmtKind::If {
                cond: cond.clone(),
                then_branch: Box::new(self.single(f, then_branch, ids)),
                else_branch: else_branch.as_ref().map(|e| Box::new(self.single(f, e, ids))),
            },
            StmtKind::Block { stmts, origin } => StmtKind::Block {
                stmts: self.list(f, stmts, ids),
                origin: *origin,
            },
            StmtKind::While { cond, body } => {
                let body = self.single(f, body, ids);
                let Some(checks) = self.loops.get(&s.id) else {
                    return vec![Stmt {
                        kind: StmtKind::While {
                            cond: cond.clone(),
                            body: Box::new(body),
                        },
                        ..s.clone()
                    }];
                };
                let mut out: Vec<Stmt> = checks.iter().map(|c| ids.assert(s, c)).collect();
                let mut inner = vec![body];
                inner.extend(checks.iter().map(|c| ids.assert(s, c)));
                let body = ids.block(s, inner);
                out.push(Stmt {
                    id: s.id,
                    pos: s.pos,
                    kind: StmtKind::While {
                        cond: cond.clone(),
                        body: Box::new(body),
                    },
                });
                return out;
            }
            other => other.clone(),
        };
        vec![Stmt {
            id: s.id,
            pos: s.pos,
            kind,
        }]
    }
}

/// Replaces ACSL nodes by ghost reads. In `ensures`, parameters read their
/// pre-call value.
fn rewrite(e: &Expr, context: ExprContext, f: &Function) -> Expr {
    e.clone().map(&mut |node| match node {
        Expr::Result => Expr::var(RESULT_GHOST),
        Expr::Old(x) | Expr::AtPre(x) => Expr::Var(pre_ghost(&x)),
        Expr::Var(x) if context == ExprContext::Ensures && f.params.contains(&x) => Expr::Var(pre_ghost(&x)),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csrc::parse_program;
    use crate::witness::{Entry, ExpressionFormat, Location, Metadata, FORMAT_VERSION_2_1};

    const DIV: &str = "\
int g;
int divide(int d) {
    g = g - d;
    while (g >= d) {
        g = g - d;
    }
    return g;
}
int main() {
    g = 10;
    int r = divide(3);
    assert(g < 10);
    return 0;
}
";

    fn loc(line: u32, column: Option<u32>) -> Location {
        Location {
            file_name: "div.c".into(),
            line,
            column,
            function: None,
        }
    }

    fn witness(entries: Vec<Entry>) -> WitnessSet {
        let mut w = WitnessSet::new(Metadata::new(FORMAT_VERSION_2_1, "t", "0"));
        w.entries = entries;
        w
    }

    const ACSL: ExpressionFormat = ExpressionFormat::AcslExpression;

    #[test]
    fn empty_witness_is_identity() {
        let p = parse_program(DIV).unwrap();
        let out = instrument_program(&p, &witness(vec![])).unwrap();
        assert_eq!(out.program, p);
        assert!(out.origins.is_empty());
    }

    #[test]
    fn div_contract_and_loop_invariant() {
        let p = parse_program(DIV).unwrap();
        let w = witness(vec![
            Entry::contract(loc(2, None), ACSL, None, Some("g < \\old(g)")),
            Entry::loop_invariant(loc(4, Some(5)), ACSL, "g < \\at(g, Pre)"),
        ]);
        let out = instrument_program(&p, &w).unwrap();
        let text = emit_c(&out.program);
        assert!(text.contains("int __wit_pre_g = g;"), "{text}");
        assert_eq!(text.matches("assert(g < __wit_pre_g);").count(), 3, "{text}");
        assert!(text.contains("int __wit_result = g;"));
        assert!(text.contains("return __wit_result;"));
        assert_eq!(out.origins.len(), 3);
        let reparsed = parse_program(&text).unwrap();
        assert_eq!(reparsed.normalized(), out.program.normalized());
    }

    #[test]
    fn ensures_parameter_reads_ghost() {
        let src = "int f(int x) { x = x + 1; return x; } int main() { int r = f(1); return r; }";
        let p = parse_program(src).unwrap();
        let w = witness(vec![Entry::contract(
            loc(1, Some(1)),
            ACSL,
            Some("x > 0"),
            Some("\\result == x + 1"),
        )]);
        let text = emit_c(&instrument_program(&p, &w).unwrap().program);
        assert!(text.contains("int __wit_pre_x = x;"));
        assert!(text.contains("assert(x > 0);"));
        assert!(text.contains("assert(__wit_result == __wit_pre_x + 1);"), "{text}");
    }

    #[test]
    fn default_requires_matches_literal_one() {
        let p = parse_program(DIV).unwrap();
        let a = witness(vec![Entry::contract(loc(2, None), ACSL, None, Some("g < \\old(g)"))]);
        let b = witness(vec![Entry::contract(
            loc(2, None),
            ACSL,
            Some("1"),
            Some("g < \\old(g)"),
        )]);
        let a = instrument_program(&p, &a).unwrap();
        let b = instrument_program(&p, &b).unwrap();
        assert_eq!(a.program, b.program);
        assert_eq!(a.origins, b.origins);
    }

    #[test]
    fn lint_errors_block_instrumentation() {
        let p = parse_program(DIV).unwrap();
        let w = witness(vec![Entry::contract(loc(3, None), ACSL, None, None)]);
        let err = instrument_program(&p, &w).unwrap_err();
        assert_eq!(err[0].code, "R1");
    }

    #[test]
    fn void_and_main_fall_off() {
        let src = "int g; void inc() { g = g + 1; } int main() { inc(); }";
        let p = parse_program(src).unwrap();
        let w = witness(vec![
            Entry::contract(loc(1, Some(8)), ACSL, None, Some("g == \\old(g) + 1")),
            Entry::contract(loc(1, Some(34)), ACSL, None, Some("\\result == 0")),
        ]);
        let out = instrument_program(&p, &w).unwrap();
        let text = emit_c(&out.program);
        assert!(text.contains("assert(g == __wit_pre_g + 1);"), "{text}");
        assert!(text.contains("int __wit_result = 0;"), "{text}");
        assert_eq!(out.origins.len(), 2);
    }

    #[test]
    fn ghost_names_disjoint_from_program() {
        let p = parse_program(DIV).unwrap();
        let w = witness(vec![Entry::contract(loc(2, None), ACSL, None, Some("g < \\old(g)"))]);
        let out = instrument_program(&p, &w).unwrap();
        let original: BTreeSet<String> = identifiers(&p);
        let added: BTreeSet<String> = identifiers(&out.program).difference(&original).cloned().collect();
        assert!(!added.is_empty());
        assert!(added.iter().all(|n| n.starts_with(GHOST_PREFIX)));
    }

    fn identifiers(p: &Program) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        for f in p.functions() {
            names.extend(f.params.iter().cloned());
            for s in &f.body {
                s.walk(&mut |s| {
                    if let StmtKind::Decl(vars) = &s.kind {
                        names.extend(vars.iter().map(|v| v.name.clone()));
                    }
                });
            }
        }
        names
    }
}
