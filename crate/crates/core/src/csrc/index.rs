use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use super::*;
use crate::diag::Diagnostic;
use crate::witness::{ColumnBase, EntryKind, Location};

#[derive(Debug, Clone)]
pub struct StmtInfo {
    pub id: StmtId,
    pub pos: Pos,
    /// Index into [`ProgramIndex::functions`].
    pub function: usize,
    pub is_loop: bool,
    /// Whether a `location_invariant` may anchor here. The `while` produced by
    /// a `for` is not a target (the `for` block is) and neither is the
    /// synthesized body block.
    pub location_target: bool,
    /// Parameters and locals visible just before the statement executes,
    /// outermost first.
    pub scope: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct FunctionInfo {
    pub name: String,
    pub pos: Pos,
    pub return_type: ReturnType,
    pub params: Vec<String>,
    pub returns: Vec<StmtId>,
    pub falls_off_end: bool,
}

/// Position and scope index over a parsed program.
#[derive(Debug, Clone)]
pub struct ProgramIndex {
    pub functions: Vec<FunctionInfo>,
    /// Statements in pre-order.
    pub stmts: Vec<StmtInfo>,
    pub globals: Vec<String>,
    by_id: HashMap<StmtId, usize>,
    file_name: Option<String>,
}

struct Walker<'a> {
    index: &'a mut ProgramIndex,
    function: usize,
    scope: Vec<String>,
}

impl Walker<'_> {
    fn stmt(&mut self, s: &Stmt, location_target: bool) {
        let info = StmtInfo {
            id: s.id,
            pos: s.pos,
            function: self.function,
            is_loop: matches!(s.kind, StmtKind::While { .. }),
            location_target,
            scope: self.scope.clone(),
        };
        self.index.by_id.insert(s.id, self.index.stmts.len());
        self.index.stmts.push(info);
        match &s.kind {
            StmtKind::Decl(vars) => self.scope.extend(vars.iter().map(|v| v.name.clone())),
            StmtKind::Return(_) => self.index.functions[self.function].returns.push(s.id),
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                self.nested(then_branch, true);
                if let Some(e) = else_branch {
                    self.nested(e, true);
                }
            }
            StmtKind::While { body, .. } => {
                let is_for_body = matches!(
                    body.kind,
                    StmtKind::Block {
                        origin: BlockOrigin::ForBody,
                        ..
                    }
                );
                self.nested(body, !is_for_body);
            }
            StmtKind::Block { stmts, origin } => {
                let mark = self.scope.len();
                for child in stmts {
                    let target = !(*origin == BlockOrigin::For && matches!(child.kind, StmtKind::While { .. }));
                    self.stmt(child, target);
                }
                self.scope.truncate(mark);
            }
            _ => {}
        }
    }

    fn nested(&mut self, s: &Stmt, location_target: bool) {
        let mark = self.scope.len();
        self.stmt(s, location_target);
        self.scope.truncate(mark);
    }
}

impl ProgramIndex {
    pub fn new(program: &Program) -> Self {
        let mut index = ProgramIndex {
            functions: Vec::new(),
            stmts: Vec::new(),
            globals: program.globals().map(|d| d.name.clone()).collect(),
            by_id: HashMap::new(),
            file_name: program.file_name.clone(),
        };
        for f in program.functions() {
            index.functions.push(FunctionInfo {
                name: f.name.clone(),
                pos: f.pos,
                return_type: f.return_type,
                params: f.params.clone(),
                returns: Vec::new(),
                falls_off_end: f.falls_off_end(),
            });
            let mut walker = Walker {
                function: index.functions.len() - 1,
                scope: f.params.clone(),
                index: &mut index,
            };
            for s in &f.body {
                walker.stmt(s, true);
            }
        }
        index
    }

    pub fn stmt(&self, id: StmtId) -> Option<&StmtInfo> {
        self.by_id.get(&id).map(|&i| &self.stmts[i])
    }

    pub fn function(&self, name: &str) -> Option<&FunctionInfo> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn function_of(&self, id: StmtId) -> Option<&FunctionInfo> {
        self.stmt(id).map(|s| &self.functions[s.function])
    }

    /// Every variable name visible before statement `id`: globals, parameters
    /// and locals in enclosing blocks.
    pub fn visible_at(&self, id: StmtId) -> BTreeSet<String> {
        let mut names: BTreeSet<String> = self.globals.iter().cloned().collect();
        if let Some(info) = self.stmt(id) {
            names.extend(info.scope.iter().cloned());
        }
        names
    }

    /// Whether `name` at statement `id` denotes a local or parameter.
    pub fn is_local_at(&self, id: StmtId, name: &str) -> bool {
        self.stmt(id).is_some_and(|info| info.scope.iter().any(|n| n == name))
    }

    /// Locals (not parameters) visible at statement `id`.
    pub fn locals_at(&self, id: StmtId) -> Vec<&str> {
        match self.stmt(id) {
            Some(info) => {
                let params = self.functions[info.function].params.len();
                info.scope[params..].iter().map(String::as_str).collect()
            }
            None => Vec::new(),
        }
    }

    /// Resolves a witness location to the program point it anchors.
    pub fn resolve(
        &self,
        loc: &Location,
        kind: EntryKind,
        column_base: ColumnBase,
    ) -> Result<ProgramPoint, Vec<Diagnostic>> {
        let column = loc.column.map(|c| column_base.to_one_based(c));
        let shown_col = loc.column.unwrap_or(0);
        let fail =
            |message: String| vec![Diagnostic::error("R1", message).at(loc.file_name.clone(), loc.line, shown_col)];
        if let Some(program_file) = &self.file_name {
            if !same_file(&loc.file_name, program_file) {
                return Err(fail(format!(
                    "location file `{}` does not match the program `{program_file}`",
                    loc.file_name
                )));
            }
        }
        let where_ = match column {
            Some(c) => format!("{}:{}", loc.line, c),
            None => format!("line {}", loc.line),
        };
        let at = |pos: Pos| pos.line == loc.line && column.is_none_or(|c| pos.column == c);
        let (point, function) = match kind {
            EntryKind::FunctionContract => {
                let found = self.functions.iter().filter(|f| at(f.pos)).min_by_key(|f| f.pos.column);
                let Some(f) = found else {
                    return Err(fail(format!("no function definition starts at {where_}")));
                };
                (
                    ProgramPoint::FunctionEntry {
                        function: f.name.clone(),
                    },
                    f.name.as_str(),
                )
            }
            EntryKind::LoopInvariant | EntryKind::LocationInvariant => {
                let want_loop = kind == EntryKind::LoopInvariant;
                let found = self
                    .stmts
                    .iter()
                    .filter(|s| at(s.pos) && if want_loop { s.is_loop } else { s.location_target })
                    .min_by_key(|s| s.pos.column);
                let Some(s) = found else {
                    let what = if want_loop { "loop" } else { "statement" };
                    return Err(fail(format!("no {what} starts at {where_}")));
                };
                let function = self.functions[s.function].name.clone();
                let point = if want_loop {
                    ProgramPoint::LoopHead { function, stmt: s.id }
                } else {
                    ProgramPoint::BeforeStatement { function, stmt: s.id }
                };
                (point, self.functions[s.function].name.as_str())
            }
        };
        if let Some(named) = &loc.function {
            if named != function {
                return Err(fail(format!(
                    "location names function `{named}` but resolves into `{function}`"
                )));
            }
        }
        Ok(point)
    }
}

fn same_file(witness_file: &str, program_file: &str) -> bool {
    witness_file == program_file || Path::new(witness_file).file_name() == Path::new(program_file).file_name()
}

/// Resolves `loc` against `program`; see [`ProgramIndex::resolve`].
pub fn resolve_location(
    loc: &Location,
    program: &Program,
    kind: EntryKind,
    column_base: ColumnBase,
) -> Result<ProgramPoint, Vec<Diagnostic>> {
    ProgramIndex::new(program).resolve(loc, kind, column_base)
}

/// All points where `f` hands control back to its caller: every `return`
/// statement plus the end of the body when control can fall off it.
pub fn enumerate_return_points(f: &Function) -> Vec<ProgramPoint> {
    let mut points = Vec::new();
    for s in &f.body {
        s.walk(&mut |s| {
            if let StmtKind::Return(_) = s.kind {
                points.push(ProgramPoint::ReturnPoint {
                    function: f.name.clone(),
                    site: ReturnSite::Statement(s.id),
                });
            }
        });
    }
    if f.falls_off_end() {
        points.push(ProgramPoint::ReturnPoint {
            function: f.name.clone(),
            site: ReturnSite::BodyEnd,
        });
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csrc::parse_program;

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
void twice(int x) { g = x; } int other() { return 1; }
int sign(int x) {
    if (x < 0) return -1;
    for (int k = 0; k < 2; k++) g = g + k;
    return 1;
}
";

    fn loc(line: u32, column: Option<u32>) -> Location {
        Location {
            file_name: "p.c".into(),
            line,
            column,
            function: None,
        }
    }

    fn index() -> ProgramIndex {
        ProgramIndex::new(&parse_program(SRC).unwrap().with_file_name("dir/p.c"))
    }

    #[test]
    fn contract_without_column_takes_first_function_on_line() {
        let idx = index();
        let p = idx.resolve(&loc(2, None), EntryKind::FunctionContract, ColumnBase::OneBased);
        assert_eq!(
            p.unwrap(),
            ProgramPoint::FunctionEntry {
                function: "product".into()
            }
        );
        let p = idx.resolve(&loc(11, None), EntryKind::FunctionContract, ColumnBase::OneBased);
        assert_eq!(
            p.unwrap(),
            ProgramPoint::FunctionEntry {
                function: "twice".into()
            }
        );
        let p = idx.resolve(&loc(11, Some(30)), EntryKind::FunctionContract, ColumnBase::OneBased);
        assert_eq!(
            p.unwrap(),
            ProgramPoint::FunctionEntry {
                function: "other".into()
            }
        );
        let p = idx.resolve(&loc(11, Some(29)), EntryKind::FunctionContract, ColumnBase::ZeroBased);
        assert_eq!(
            p.unwrap(),
            ProgramPoint::FunctionEntry {
                function: "other".into()
            }
        );
    }

    #[test]
    fn contract_mid_token_is_rejected() {
        let idx = index();
        let err = idx
            .resolve(&loc(2, Some(2)), EntryKind::FunctionContract, ColumnBase::OneBased)
            .unwrap_err();
        assert_eq!(err[0].code, "R1");
    }

    #[test]
    fn loop_head_at_while_keyword() {
        let idx = index();
        let p = idx
            .resolve(&loc(5, Some(5)), EntryKind::LoopInvariant, ColumnBase::OneBased)
            .unwrap();
        let ProgramPoint::LoopHead { stmt, function } = p else {
            panic!()
        };
        assert_eq!(function, "product");
        assert_eq!(idx.stmt(stmt).unwrap().pos, Pos::new(5, 5));
        // `w` + 1 is not a loop start
        assert!(idx
            .resolve(&loc(5, Some(6)), EntryKind::LoopInvariant, ColumnBase::OneBased)
            .is_err());
    }

    #[test]
    fn for_loop_head_and_location() {
        let idx = index();
        let head = idx
            .resolve(&loc(14, Some(5)), EntryKind::LoopInvariant, ColumnBase::OneBased)
            .unwrap();
        let ProgramPoint::LoopHead { stmt, .. } = head else {
            panic!()
        };
        assert!(idx.stmt(stmt).unwrap().is_loop);
        assert!(idx.visible_at(stmt).contains("k"));
        let before = idx
            .resolve(&loc(14, Some(5)), EntryKind::LocationInvariant, ColumnBase::OneBased)
            .unwrap();
        let ProgramPoint::BeforeStatement { stmt: s2, .. } = before else {
            panic!()
        };
        assert_ne!(s2, stmt);
        assert!(!idx.visible_at(s2).contains("k"));
    }

    #[test]
    fn function_key_and_file_checked() {
        let idx = index();
        let mut l = loc(2, Some(1));
        l.function = Some("main".into());
        assert!(idx
            .resolve(&l, EntryKind::FunctionContract, ColumnBase::OneBased)
            .is_err());
        l.function = Some("product".into());
        assert!(idx
            .resolve(&l, EntryKind::FunctionContract, ColumnBase::OneBased)
            .is_ok());
        l.file_name = "q.c".into();
        assert!(idx
            .resolve(&l, EntryKind::FunctionContract, ColumnBase::OneBased)
            .is_err());
    }

    #[test]
    fn scopes() {
        let idx = index();
        let ret = idx.function("product").unwrap().returns[0];
        let vis = idx.visible_at(ret);
        for name in ["g", "a", "b", "res", "i"] {
            assert!(vis.contains(name), "{name}");
        }
        assert_eq!(idx.locals_at(ret), ["res", "i"]);
    }

    #[test]
    fn return_points() {
        let p = parse_program(SRC).unwrap();
        assert_eq!(enumerate_return_points(p.function("sign").unwrap()).len(), 2);
        let twice = enumerate_return_points(p.function("twice").unwrap());
        assert_eq!(
            twice,
            [ProgramPoint::ReturnPoint {
                function: "twice".into(),
                site: ReturnSite::BodyEnd
            }]
        );
        assert_eq!(enumerate_return_points(p.function("product").unwrap()).len(), 1);
        let p = parse_program("int f(int x) { if (x) return 1; }").unwrap();
        assert_eq!(enumerate_return_points(p.function("f").unwrap()).len(), 2);
        let p = parse_program("int f(int x) { if (x) { return 1; } else return 2; }").unwrap();
        assert_eq!(enumerate_return_points(p.function("f").unwrap()).len(), 2);
        let p = parse_program("void f() { while (1) { } }").unwrap();
        assert_eq!(enumerate_return_points(p.function("f").unwrap()).len(), 0);
    }
}
