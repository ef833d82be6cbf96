//! Lowering of extended witnesses to format 2.0.
//!
//! * `requires` becomes a `location_invariant` at the first statement of the body.
//! * `ensures` over globals only becomes a `location_invariant` at every
//!   `return` statement.
//! * Invariants without `\at` are kept.
//!
//! Everything else is reported in a [`ResidueReport`] with a reason code.
//! Output order: requires-derived entries, kept invariants, ensures-derived
//! entries, so that checks sharing a statement keep their relative order.

use serde::Serialize;

use crate::csrc::{enumerate_return_points, Program, ProgramPoint, ReturnSite, Rhs, StmtKind};
use crate::diag::{Diagnostic, SourcePos};
use crate::expr::{free_variables, print_expression, Expr, ExprContext, VarUse};
use crate::lint::{analyze, Clause, LintOptions, ResolvedEntry};
use crate::witness::{ColumnBase, Entry, EntryKind, ExpressionFormat, Location, WitnessSet, FORMAT_VERSION_2_0};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ResidueReason {
    /// `\result` has no counterpart in 2.0.
    ResultRef,
    /// `\old(x)`.
    OldRef,
    /// `\at(x, Pre)`, or a parameter in `ensures` (which reads its pre-call value).
    AtPre,
    /// The function can return by falling off the end of its body, or has an empty body.
    NoStatementPosition,
    /// `return f(...)`: a location before the statement precedes the call.
    ReturnCall,
}

impl ResidueReason {
    pub fn code(self) -> &'static str {
        match self {
            ResidueReason::ResultRef => "RESULT_REF",
            ResidueReason::OldRef => "OLD_REF",
            ResidueReason::AtPre => "AT_PRE",
            ResidueReason::NoStatementPosition => "NO_STATEMENT_POSITION",
            ResidueReason::ReturnCall => "RETURN_CALL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueItem {
    pub entry_index: usize,
    pub kind: &'static str,
    pub clause: &'static str,
    pub reason: ResidueReason,
    pub expression: String,
    /// The entry's location, or the offending return site.
    pub position: SourcePos,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ResidueReport {
    pub residue: Vec<ResidueItem>,
}

impl ResidueReport {
    pub fn is_empty(&self) -> bool {
        self.residue.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("residue serializes")
    }
}

#[derive(Debug, Clone)]
pub struct Lowered {
    pub witness: WitnessSet,
    pub residue: ResidueReport,
    /// For each output entry, the index of the input entry it came from.
    pub origins: Vec<usize>,
}

pub fn lower_to_v20(w: &WitnessSet, p: &Program) -> Result<Lowered, Vec<Diagnostic>> {
    lower_with(w, p, LintOptions::default())
}

pub fn lower_with(w: &WitnessSet, p: &Program, options: LintOptions) -> Result<Lowered, Vec<Diagnostic>> {
    let analysis = analyze(w, p, options);
    let Some(entries) = analysis.resolved() else {
        return Err(analysis.diagnostics.into_iter().filter(Diagnostic::is_error).collect());
    };
    if !w.is_extended() {
        return Ok(Lowered {
            witness: w.clone(),
            residue: ResidueReport::default(),
            origins: (0..w.entries.len()).collect(),
        });
    }
    let mut lw = Lowering {
        p,
        base: options.column_base,
        first: Vec::new(),
        middle: Vec::new(),
        last: Vec::new(),
        residue: Vec::new(),
    };
    for (entry, resolved) in w.entries.iter().zip(&entries) {
        lw.entry(entry, resolved);
    }
    let mut metadata = w.metadata.clone();
    metadata.format_version = FORMAT_VERSION_2_0.to_owned();
    let mut witness = WitnessSet::new(metadata);
    let mut origins = Vec::new();
    for (origin, e) in lw.first.into_iter().chain(lw.middle).chain(lw.last) {
        origins.push(origin);
        witness.entries.push(e);
    }
    Ok(Lowered {
        witness,
        residue: ResidueReport { residue: lw.residue },
        origins,
    })
}

struct Lowering<'p> {
    p: &'p Program,
    base: ColumnBase,
    first: Vec<(usize, Entry)>,
    middle: Vec<(usize, Entry)>,
    last: Vec<(usize, Entry)>,
    residue: Vec<ResidueItem>,
}

fn acsl_reasons(e: &Expr, params: &[String]) -> Vec<ResidueReason> {
    let mut reasons = Vec::new();
    e.walk(&mut |node| {
        let r = match node {
            Expr::Result => Some(ResidueReason::ResultRef),
            Expr::Old(_) => Some(ResidueReason::OldRef),
            Expr::AtPre(_) => Some(ResidueReason::AtPre),
            Expr::Var(x) if params.contains(x) => Some(ResidueReason::AtPre),
            _ => None,
        };
        if let Some(r) = r {
            if !reasons.contains(&r) {
                reasons.push(r);
            }
        }
    });
    reasons
}

impl Lowering<'_> {
    fn location(&self, entry: &Entry, function: &str, line: u32, column: u32) -> Location {
        let column = match self.base {
            ColumnBase::OneBased => column,
            ColumnBase::ZeroBased => column - 1,
        };
        Location {
            file_name: entry.location.file_name.clone(),
            line,
            column: Some(column),
            function: Some(function.to_owned()),
        }
    }

    fn entry_pos(entry: &Entry) -> SourcePos {
        SourcePos {
            file: entry.location.file_name.clone(),
            line: entry.location.line,
            column: entry.location.column.unwrap_or(0),
        }
    }

    fn push_residue(&mut self, i: usize, entry: &Entry, clause: &Clause, reason: ResidueReason, position: SourcePos) {
        self.residue.push(ResidueItem {
            entry_index: i,
            kind: entry.kind().as_str(),
            clause: clause.context.as_str(),
            reason,
            expression: print_expression(&clause.expr),
            position,
        });
    }

    fn entry(&mut self, entry: &Entry, r: &ResolvedEntry) {
        let i = r.index;
        if r.kind != EntryKind::FunctionContract {
            let clause = &r.clauses[0];
            if clause.expr.has_acsl() {
                self.push_residue(i, entry, clause, ResidueReason::AtPre, Self::entry_pos(entry));
            } else {
                let mut kept = entry.clone();
                kept.format = ExpressionFormat::CExpression;
                self.middle.push((i, kept));
            }
            return;
        }
        let f = self.p.function(r.function()).expect("resolved function");
        for clause in &r.clauses {
            if clause.expr.is_true_literal() {
                continue;
            }
            let text = print_expression(&clause.expr);
            match clause.context {
                ExprContext::Requires => match f.body.first() {
                    Some(s) => {
                        let loc = self.location(entry, &f.name, s.pos.line, s.pos.column);
                        self.first
                            .push((i, Entry::location_invariant(loc, ExpressionFormat::CExpression, &text)));
                    }
                    None => {
                        let pos = SourcePos {
                            file: entry.location.file_name.clone(),
                            line: f.pos.line,
                            column: f.pos.column,
                        };
                        self.push_residue(i, entry, clause, ResidueReason::NoStatementPosition, pos);
                    }
                },
                ExprContext::Ensures => self.ensures(entry, r, clause, f),
                ExprContext::Invariant => unreachable!("contracts have no invariant clause"),
            }
        }
    }

    fn ensures(&mut self, entry: &Entry, r: &ResolvedEntry, clause: &Clause, f: &crate::csrc::Function) {
        let i = r.index;
        let reasons = acsl_reasons(&clause.expr, &f.params);
        let mut blocked = false;
        for reason in reasons {
            self.push_residue(i, entry, clause, reason, Self::entry_pos(entry));
            blocked = true;
        }
        let mut sites = Vec::new();
        let returns: Vec<_> = f.body.iter().flat_map(collect_returns).collect();
        for point in enumerate_return_points(f) {
            let ProgramPoint::ReturnPoint { site, .. } = point else {
                continue;
            };
            match site {
                ReturnSite::Statement(id) => {
                    let (pos, is_call) = returns
                        .iter()
                        .find(|(sid, ..)| *sid == id)
                        .map(|&(_, pos, is_call)| (pos, is_call))
                        .expect("return statement indexed");
                    if is_call {
                        let sp = SourcePos {
                            file: entry.location.file_name.clone(),
                            line: pos.line,
                            column: pos.column,
                        };
                        self.push_residue(i, entry, clause, ResidueReason::ReturnCall, sp);
                        blocked = true;
                    } else {
                        sites.push(pos);
                    }
                }
                ReturnSite::BodyEnd => {
                    let sp = SourcePos {
                        file: entry.location.file_name.clone(),
                        line: f.pos.line,
                        column: f.pos.column,
                    };
                    self.push_residue(i, entry, clause, ResidueReason::NoStatementPosition, sp);
                    blocked = true;
                }
            }
        }
        if blocked {
            return;
        }
        debug_assert!(free_variables(&clause.expr)
            .iter()
            .all(|u| matches!(u, VarUse::Current(_))));
        let text = print_expression(&clause.expr);
        for pos in sites {
            let loc = self.location(entry, &f.name, pos.line, pos.column);
            self.last
                .push((i, Entry::location_invariant(loc, ExpressionFormat::CExpression, &text)));
        }
    }
}

fn collect_returns(s: &crate::csrc::Stmt) -> Vec<(crate::csrc::StmtId, crate::csrc::Pos, bool)> {
    let mut out = Vec::new();
    s.walk(&mut |s| {
        if let StmtKind::Return(v) = &s.kind {
            out.push((s.id, s.pos, matches!(v, Some(Rhs::Call(_)))));
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csrc::parse_program;
    use crate::witness::{Metadata, FORMAT_VERSION_2_1};

    const SRC: &str = "\
int g;
int product(int a, int b) {
    int res = 0;
    int i = 0;
    while (i < b) {
        res = res + a;
        i = i + 1;
    }
    return res;
}
int pick(int x) {
    if (x > 0) return 1;
    g = g + 1;
    return 2;
}
void bump() { g = g + 1; }
int relay(int x) { return pick(x); }
int main() { int r = product(2, 3); r = pick(r); bump(); r = relay(r); return 0; }
";

    fn loc(line: u32, column: Option<u32>) -> Location {
        Location {
            file_name: "t.c".into(),
            line,
            column,
            function: None,
        }
    }

    fn witness(version: &str, entries: Vec<Entry>) -> WitnessSet {
        let mut w = WitnessSet::new(Metadata::new(version, "t", "0"));
        w.entries = entries;
        w
    }

    const ACSL: ExpressionFormat = ExpressionFormat::AcslExpression;
    const C: ExpressionFormat = ExpressionFormat::CExpression;

    fn reasons(l: &Lowered) -> Vec<&'static str> {
        l.residue.residue.iter().map(|r| r.reason.code()).collect()
    }

    #[test]
    fn requires_becomes_location_invariant() {
        let p = parse_program(SRC).unwrap();
        let w = witness(
            FORMAT_VERSION_2_1,
            vec![Entry::contract(loc(2, None), C, Some("b >= 0"), None)],
        );
        let l = lower_to_v20(&w, &p).unwrap();
        assert!(l.residue.is_empty());
        assert_eq!(l.witness.metadata.format_version, "2.0");
        assert_eq!(
            l.witness.entries,
            [Entry::location_invariant(
                Location {
                    function: Some("product".into()),
                    ..loc(3, Some(5))
                },
                C,
                "b >= 0"
            )]
        );
    }

    #[test]
    fn result_and_old_are_residue() {
        let p = parse_program(SRC).unwrap();
        let w = witness(
            FORMAT_VERSION_2_1,
            vec![
                Entry::contract(loc(2, None), ACSL, Some("b >= 0"), Some("\\result == a * b")),
                Entry::contract(loc(11, None), ACSL, None, Some("g >= \\old(g)")),
                Entry::loop_invariant(loc(5, Some(5)), ACSL, "g == \\at(g, Pre)"),
                Entry::contract(loc(11, None), C, None, Some("x == x")),
            ],
        );
        let l = lower_to_v20(&w, &p).unwrap();
        assert_eq!(reasons(&l), ["RESULT_REF", "AT_PRE", "OLD_REF", "AT_PRE", "AT_PRE"]);
        assert_eq!(l.witness.entries.len(), 1);
        assert_eq!(l.origins, [0]);
    }

    #[test]
    fn ensures_over_globals_per_return() {
        let p = parse_program(SRC).unwrap();
        let w = witness(
            FORMAT_VERSION_2_1,
            vec![Entry::contract(loc(11, None), C, None, Some("g >= 0"))],
        );
        let l = lower_to_v20(&w, &p).unwrap();
        assert!(l.residue.is_empty());
        let lines: Vec<_> = l
            .witness
            .entries
            .iter()
            .map(|e| (e.location.line, e.location.column))
            .collect();
        assert_eq!(lines, [(12, Some(16)), (14, Some(5))]);
    }

    #[test]
    fn body_end_and_call_returns_are_residue() {
        let p = parse_program(SRC).unwrap();
        let w = witness(
            FORMAT_VERSION_2_1,
            vec![
                Entry::contract(loc(16, None), C, None, Some("g > 0")),
                Entry::contract(loc(17, None), C, None, Some("g > 0")),
            ],
        );
        let l = lower_to_v20(&w, &p).unwrap();
        assert_eq!(reasons(&l), ["NO_STATEMENT_POSITION", "RETURN_CALL"]);
        assert!(l.witness.entries.is_empty());
    }

    #[test]
    fn v20_is_identity() {
        let p = parse_program(SRC).unwrap();
        let w = witness(
            FORMAT_VERSION_2_0,
            vec![Entry::loop_invariant(loc(5, Some(5)), C, "i <= b || b < 0")],
        );
        let l = lower_to_v20(&w, &p).unwrap();
        assert_eq!(l.witness, w);
        assert!(l.residue.is_empty());
    }

    #[test]
    fn keyword_free_acsl_invariant_becomes_c() {
        let p = parse_program(SRC).unwrap();
        let w = witness(
            FORMAT_VERSION_2_1,
            vec![Entry::loop_invariant(loc(5, Some(5)), ACSL, "res == i * a")],
        );
        let l = lower_to_v20(&w, &p).unwrap();
        assert_eq!(l.witness.entries[0].format, C);
        assert_eq!(l.witness.entries[0].invariant_text(), Some("res == i * a"));
    }

    #[test]
    fn zero_based_columns_preserved() {
        let p = parse_program(SRC).unwrap();
        let w = witness(
            FORMAT_VERSION_2_1,
            vec![Entry::contract(loc(2, Some(0)), C, Some("b >= 0"), None)],
        );
        let opts = LintOptions {
            column_base: ColumnBase::ZeroBased,
        };
        let l = lower_with(&w, &p, opts).unwrap();
        assert_eq!(l.witness.entries[0].location.column, Some(4));
    }

    #[test]
    fn residue_json_codes() {
        let p = parse_program(SRC).unwrap();
        let w = witness(
            FORMAT_VERSION_2_1,
            vec![Entry::contract(loc(2, None), ACSL, None, Some("\\result == a * b"))],
        );
        let j = lower_to_v20(&w, &p).unwrap().residue.to_json();
        assert_eq!(j["residue"][0]["reason"], "RESULT_REF");
        assert_eq!(j["residue"][0]["entry_index"], 0);
    }
}
