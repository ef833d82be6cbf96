//! Static well-formedness of a witness against a program.
//!
//! Rule ids:
//!
//! | id | checks |
//! |----|--------|
//! | `R1` | the location resolves to a function definition, loop or statement |
//! | `R2` | clauses parse in their format and context |
//! | `R3` | contract clauses only use globals and parameters of the function |
//! | `R4` | no `\result` in contracts of void functions |
//! | `R5` | ACSL keywords only with `acsl_expression` |
//! | `R6` | invariant variables are in scope; `\at` only of globals and parameters |
//! | `R7` | `\at` uses the label `Pre` |
//! | `SHADOW` | an `ensures` global is hidden by a local at a return point |
//! | `GHOST` | the program uses the reserved `__wit_` prefix |
//! | `PROGRAM` | name resolution, arity, return forms, `main` |
//! | `DUPLICATE` | warning: entry repeated verbatim |
//! | `TAUTOLOGY` | warning: entry constrains nothing |

use std::collections::{BTreeSet, HashSet};

use crate::csrc::{
    check_program, enumerate_return_points, Function, Pos, Program, ProgramIndex, ProgramPoint, ReturnSite, ReturnType,
    StmtKind,
};
use crate::diag::{has_errors, Diagnostic};
use crate::expr::{evaluate, free_variables, parse_expression, EvalEnv, Expr, ExprContext, ExprErrorKind, VarUse};
use crate::witness::{ColumnBase, Entry, EntryKind, WitnessSet};

#[derive(Debug, Clone, Copy, Default)]
pub struct LintOptions {
    pub column_base: ColumnBase,
}

/// One parsed clause of an entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub context: ExprContext,
    pub expr: Expr,
}

/// An entry whose location resolved and whose clauses all parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedEntry {
    /// Position in the witness `content` list.
    pub index: usize,
    pub kind: EntryKind,
    pub point: ProgramPoint,
    /// `[requires, ensures]` for contracts, `[invariant]` otherwise.
    pub clauses: Vec<Clause>,
}

impl ResolvedEntry {
    pub fn function(&self) -> &str {
        self.point.function()
    }

    pub fn clause(&self, context: ExprContext) -> Option<&Expr> {
        self.clauses.iter().find(|c| c.context == context).map(|c| &c.expr)
    }
}

/// Result of linting, with the resolved form of every entry that got far
/// enough to have one.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub index: ProgramIndex,
    /// Parallel to the witness entries.
    pub entries: Vec<Option<ResolvedEntry>>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Analysis {
    pub fn has_errors(&self) -> bool {
        has_errors(&self.diagnostics)
    }

    /// The resolved entries, when no error was found.
    pub fn resolved(&self) -> Option<Vec<&ResolvedEntry>> {
        if self.has_errors() {
            return None;
        }
        self.entries.iter().map(Option::as_ref).collect()
    }
}

pub fn lint_witness(w: &WitnessSet, p: &Program) -> Vec<Diagnostic> {
    analyze(w, p, LintOptions::default()).diagnostics
}

pub fn lint_witness_with(w: &WitnessSet, p: &Program, options: LintOptions) -> Vec<Diagnostic> {
    analyze(w, p, options).diagnostics
}

struct Ctx<'a> {
    program: &'a Program,
    index: &'a ProgramIndex,
    globals: HashSet<&'a str>,
    found: Vec<(Diagnostic, usize)>,
}

fn entry_path(i: usize, key: &str) -> String {
    format!("content[{i}].invariant.{key}")
}

fn clause_key(context: ExprContext) -> &'static str {
    match context {
        ExprContext::Requires => "requires",
        ExprContext::Ensures => "ensures",
        ExprContext::Invariant => "value",
    }
}

fn rule_for(kind: ExprErrorKind) -> &'static str {
    match kind {
        ExprErrorKind::KeywordFormat => "R5",
        ExprErrorKind::AtLabel => "R7",
        ExprErrorKind::Syntax | ExprErrorKind::Unsupported | ExprErrorKind::KeywordContext => "R2",
    }
}

/// Lints `w` against `p` and resolves every entry.
pub fn analyze(w: &WitnessSet, p: &Program, options: LintOptions) -> Analysis {
    let index = ProgramIndex::new(p);
    let mut cx = Ctx {
        program: p,
        index: &index,
        globals: index.globals.iter().map(String::as_str).collect(),
        found: check_program(p).into_iter().map(|d| (d, usize::MAX)).collect(),
    };
    let mut entries = Vec::with_capacity(w.entries.len());
    for (i, entry) in w.entries.iter().enumerate() {
        entries.push(cx.entry(i, entry, options));
        if w.entries[..i].contains(entry) {
            cx.push(
                i,
                entry,
                Diagnostic::warning("DUPLICATE", "entry repeats an earlier entry"),
                "location",
            );
        }
    }
    let mut found = cx.found;
    found.sort_by(|(a, ia), (b, ib)| {
        let key = |d: &Diagnostic| d.position.clone().map(|p| (p.file, p.line, p.column));
        key(a).cmp(&key(b)).then(a.code.cmp(b.code)).then(ia.cmp(ib))
    });
    Analysis {
        entries,
        diagnostics: found.into_iter().map(|(d, _)| d).collect(),
        index,
    }
}

impl Ctx<'_> {
    fn push(&mut self, i: usize, entry: &Entry, d: Diagnostic, key: &str) {
        let loc = &entry.location;
        let d = d
            .with_path(entry_path(i, key))
            .at(loc.file_name.clone(), loc.line, loc.column.unwrap_or(0));
        self.found.push((d, i));
    }

    fn entry(&mut self, i: usize, entry: &Entry, options: LintOptions) -> Option<ResolvedEntry> {
        let kind = entry.kind();
        let point = match self.index.resolve(&entry.location, kind, options.column_base) {
            Ok(point) => Some(point),
            Err(diags) => {
                for d in diags {
                    self.found.push((d.with_path(entry_path(i, "location")), i));
                }
                None
            }
        };
        let texts: Vec<(ExprContext, &str)> = match kind {
            EntryKind::FunctionContract => vec![
                (ExprContext::Requires, entry.requires_text().unwrap_or("1")),
                (ExprContext::Ensures, entry.ensures_text().unwrap_or("1")),
            ],
            _ => vec![(ExprContext::Invariant, entry.invariant_text().unwrap_or("1"))],
        };
        let mut clauses = Vec::new();
        for (context, text) in texts {
            match parse_expression(text, entry.format, context) {
                Ok(expr) => clauses.push(Clause { context, expr }),
                Err(errors) => {
                    for e in errors {
                        let d = Diagnostic::error(rule_for(e.kind), format!("{context}: {e}"));
                        self.push(i, entry, d, clause_key(context));
                    }
                }
            }
        }
        let point = point?;
        if clauses.len() != texts_len(kind) {
            return None;
        }
        let before = self.found.len();
        for c in &clauses {
            self.scope_rules(i, entry, &point, c);
        }
        if clauses.iter().all(|c| is_tautology(&c.expr)) {
            let what = if kind == EntryKind::FunctionContract {
                "contract clauses are all trivially true"
            } else {
                "invariant is trivially true"
            };
            self.push(
                i,
                entry,
                Diagnostic::warning("TAUTOLOGY", what),
                clause_key(clauses[0].context),
            );
        }
        let clean = !self.found[before..].iter().any(|(d, _)| d.is_error());
        clean.then_some(ResolvedEntry {
            index: i,
            kind,
            point,
            clauses,
        })
    }

    fn scope_rules(&mut self, i: usize, entry: &Entry, point: &ProgramPoint, c: &Clause) {
        let key = clause_key(c.context);
        let program = self.program;
        let f = program.function(point.function()).expect("resolved function exists");
        let is_param = |x: &str| f.params.iter().any(|p| p == x);
        let mut errs = Vec::new();
        match point {
            ProgramPoint::FunctionEntry { .. } => {
                for u in free_variables(&c.expr) {
                    match &u {
                        VarUse::Current(x) | VarUse::Pre(x) => {
                            if !self.globals.contains(x.as_str()) && !is_param(x) {
                                errs.push(Diagnostic::error(
                                    "R3",
                                    format!(
                                        "{}: `{x}` is neither a global nor a parameter of `{}`",
                                        c.context, f.name
                                    ),
                                ));
                            }
                        }
                        VarUse::Result => {
                            if f.return_type == ReturnType::Void {
                                errs.push(Diagnostic::error(
                                    "R4",
                                    format!("ensures: \\result used in contract of void function `{}`", f.name),
                                ));
                            }
                        }
                    }
                }
                if c.context == ExprContext::Ensures {
                    errs.extend(self.shadowing(f, &c.expr));
                }
            }
            ProgramPoint::LoopHead { stmt, .. } | ProgramPoint::BeforeStatement { stmt, .. } => {
                let visible = self.index.visible_at(*stmt);
                for u in free_variables(&c.expr) {
                    match &u {
                        VarUse::Current(x) if !visible.contains(x) => errs.push(Diagnostic::error(
                            "R6",
                            format!("invariant: `{x}` is not in scope at the location"),
                        )),
                        VarUse::Pre(x) if !self.globals.contains(x.as_str()) && !is_param(x) => {
                            errs.push(Diagnostic::error(
                                "R6",
                                format!(
                                    "invariant: \\at({x}, Pre) needs a global or a parameter of `{}`",
                                    f.name
                                ),
                            ))
                        }
                        _ => {}
                    }
                }
            }
            ProgramPoint::ReturnPoint { .. } => {}
        }
        for d in errs {
            self.push(i, entry, d, key);
        }
    }

    /// A global read by `ensures` must not be hidden by a local at any
    /// return point, or the clause would read the local after the body ran.
    fn shadowing(&self, f: &Function, ensures: &Expr) -> Vec<Diagnostic> {
        let globals_read: BTreeSet<String> = free_variables(ensures)
            .into_iter()
            .filter_map(|u| match u {
                VarUse::Current(x) if !f.params.contains(&x) => Some(x),
                _ => None,
            })
            .collect();
        let mut out = Vec::new();
        for rp in enumerate_return_points(f) {
            let ProgramPoint::ReturnPoint { site, .. } = rp else {
                continue;
            };
            let (locals, pos): (Vec<&str>, Pos) = match site {
                ReturnSite::Statement(id) => (
                    self.index.locals_at(id),
                    self.index.stmt(id).map(|s| s.pos).unwrap_or_default(),
                ),
                ReturnSite::BodyEnd => (top_level_locals(f), f.pos),
            };
            for g in &globals_read {
                if locals.contains(&g.as_str()) {
                    out.push(Diagnostic::error(
                        "SHADOW",
                        format!("ensures: global `{g}` is shadowed by a local at the return point at {pos}"),
                    ));
                }
            }
        }
        out
    }
}

fn texts_len(kind: EntryKind) -> usize {
    if kind == EntryKind::FunctionContract {
        2
    } else {
        1
    }
}

fn top_level_locals(f: &Function) -> Vec<&str> {
    f.body
        .iter()
        .filter_map(|s| match &s.kind {
            StmtKind::Decl(vars) => Some(vars.iter().map(|v| v.name.as_str())),
            _ => None,
        })
        .flatten()
        .collect()
}

/// A clause without variables that evaluates to nonzero.
fn is_tautology(e: &Expr) -> bool {
    free_variables(e).is_empty() && matches!(evaluate(e, &EvalEnv::default(), ExprContext::Invariant), Ok(v) if v != 0)
}
