//! Front end for the supported C subset.
//!
//! Programs consist of `int` globals, function prototypes, and functions
//! returning `int` or `void` with `int` parameters. Statements: local `int`
//! declarations, assignment (including `+=`-style and `++`/`--` statement
//! forms), `if`/`else`, `while`, `for` (desugared into a block holding the
//! initializer and a `while`), `return`, direct calls, `assert(e)`,
//! `reach_error()`, `abort()` and `__VERIFIER_nondet_int()` as the input
//! source. Every statement records the 1-based line and byte column of its
//! first character.

mod check;
mod index;
mod parser;

pub use check::{check_program, GHOST_PREFIX};
pub use index::{enumerate_return_points, resolve_location, ProgramIndex, StmtInfo};
pub use parser::parse_program;

use std::fmt;

use crate::expr::Expr;
pub use crate::lexer::Pos;

pub const NONDET_INT: &str = "__VERIFIER_nondet_int";
/// Names of functions the interpreter and emitter treat as built in.
pub const BUILTIN_FUNCTIONS: [&str; 4] = [NONDET_INT, "assert", "reach_error", "abort"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct StmtId(pub u32);

impl fmt::Display for StmtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReturnType {
    Int,
    Void,
}

impl ReturnType {
    pub fn as_str(self) -> &'static str {
        match self {
            ReturnType::Int => "int",
            ReturnType::Void => "void",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub items: Vec<Item>,
    /// Name the witness `file_name` keys must match, when known.
    pub file_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Global(Decl),
    Function(Function),
    Prototype(Prototype),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decl {
    pub pos: Pos,
    pub vars: Vec<Declarator>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declarator {
    pub name: String,
    pub init: Option<Rhs>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrototypeParams {
    /// `f()`
    Unspecified,
    /// `f(void)`
    Void,
    /// `f(int a, int)`
    List(Vec<Option<String>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prototype {
    pub pos: Pos,
    pub is_extern: bool,
    pub return_type: ReturnType,
    pub name: String,
    pub params: PrototypeParams,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    /// Position of the first character of the definition (the return type).
    pub pos: Pos,
    pub return_type: ReturnType,
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub id: StmtId,
    pub pos: Pos,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockOrigin {
    /// A `{ ... }` in the source.
    Plain,
    /// The block a `for` statement desugars into: `{ init; while (cond) ... }`.
    For,
    /// The body of a desugared `for`: `{ body; step; }`.
    ForBody,
    /// Introduced by a program transformation.
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Decl(Vec<Declarator>),
    Assign {
        target: String,
        value: Rhs,
    },
    Call(Call),
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    Block {
        stmts: Vec<Stmt>,
        origin: BlockOrigin,
    },
    Return(Option<Rhs>),
    Assert(Expr),
    ReachError,
    Abort,
    Empty,
}

/// Right-hand side of an assignment, initializer or return.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    Expr(Expr),
    Call(Call),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    pub callee: String,
    pub args: Vec<Expr>,
}

impl Call {
    pub fn is_nondet(&self) -> bool {
        self.callee == NONDET_INT
    }
}

impl Program {
    pub fn functions(&self) -> impl Iterator<Item = &Function> {
        self.items.iter().filter_map(|item| match item {
            Item::Function(f) => Some(f),
            _ => None,
        })
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions().find(|f| f.name == name)
    }

    pub fn globals(&self) -> impl Iterator<Item = &Declarator> {
        self.items.iter().flat_map(|item| match item {
            Item::Global(d) => d.vars.as_slice(),
            _ => &[],
        })
    }

    pub fn with_file_name(mut self, name: impl Into<String>) -> Self {
        self.file_name = Some(name.into());
        self
    }

    /// Copy with positions, statement ids, block origins and prototypes of
    /// built-in functions erased. Two programs that differ only in layout
    /// normalize to the same value.
    pub fn normalized(&self) -> Program {
        let items = self
            .items
            .iter()
            .filter(|item| !matches!(item, Item::Prototype(p) if BUILTIN_FUNCTIONS.contains(&p.name.as_str())))
            .map(|item| match item {
                Item::Global(d) => Item::Global(Decl {
                    pos: Pos::default(),
                    vars: d.vars.clone(),
                }),
                Item::Prototype(p) => Item::Prototype(Prototype {
                    pos: Pos::default(),
                    ..p.clone()
                }),
                Item::Function(f) => Item::Function(Function {
                    pos: Pos::default(),
                    body: f.body.iter().map(normalize_stmt).collect(),
                    ..f.clone()
                }),
            })
            .collect();
        Program { items, file_name: None }
    }

    /// Largest statement id in use.
    pub fn max_stmt_id(&self) -> StmtId {
        let mut max = StmtId(0);
        for f in self.functions() {
            for s in &f.body {
                s.walk(&mut |s| max = max.max(s.id));
            }
        }
        max
    }
}

fn normalize_stmt(s: &Stmt) -> Stmt {
    let kind = match &s.kind {
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => StmtKind::If {
            cond: cond.clone(),
            then_branch: Box::new(normalize_stmt(then_branch)),
            else_branch: else_branch.as_ref().map(|e| Box::new(normalize_stmt(e))),
        },
        StmtKind::While { cond, body } => StmtKind::While {
            cond: cond.clone(),
            body: Box::new(normalize_stmt(body)),
        },
        StmtKind::Block { stmts, .. } => StmtKind::Block {
            stmts: stmts.iter().map(normalize_stmt).collect(),
            origin: BlockOrigin::Plain,
        },
        other => other.clone(),
    };
    Stmt {
        id: StmtId(0),
        pos: Pos::default(),
        kind,
    }
}

impl Stmt {
    /// Pre-order traversal of this statement and its sub-statements.
    pub fn walk(&self, f: &mut impl FnMut(&Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.walk(f);
                if let Some(e) = else_branch {
                    e.walk(f);
                }
            }
            StmtKind::While { body, .. } => body.walk(f),
            StmtKind::Block { stmts, .. } => stmts.iter().for_each(|s| s.walk(f)),
            _ => {}
        }
    }

    /// Whether control can leave the statement by falling through to the next
    /// one. There is no `break`, so `while (c)` only completes when `c` is not
    /// a nonzero constant.
    pub fn can_complete(&self) -> bool {
        match &self.kind {
            StmtKind::Return(_) | StmtKind::ReachError | StmtKind::Abort => false,
            StmtKind::Block { stmts, .. } => block_can_complete(stmts),
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => then_branch.can_complete() || else_branch.as_ref().is_none_or(|e| e.can_complete()),
            StmtKind::While { cond, .. } => !matches!(cond, Expr::Int(v) if *v != 0),
            _ => true,
        }
    }
}

pub fn block_can_complete(stmts: &[Stmt]) -> bool {
    stmts.iter().all(Stmt::can_complete)
}

impl Function {
    /// Whether execution can reach the closing brace of the body.
    pub fn falls_off_end(&self) -> bool {
        block_can_complete(&self.body)
    }
}

/// A resolved anchor for a witness entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProgramPoint {
    FunctionEntry { function: String },
    LoopHead { function: String, stmt: StmtId },
    BeforeStatement { function: String, stmt: StmtId },
    ReturnPoint { function: String, site: ReturnSite },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReturnSite {
    Statement(StmtId),
    /// The closing brace of a body that control can fall off.
    BodyEnd,
}

impl ProgramPoint {
    pub fn function(&self) -> &str {
        match self {
            ProgramPoint::FunctionEntry { function }
            | ProgramPoint::LoopHead { function, .. }
            | ProgramPoint::BeforeStatement { function, .. }
            | ProgramPoint::ReturnPoint { function, .. } => function,
        }
    }
}

impl fmt::Display for ProgramPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProgramPoint::FunctionEntry { function } => write!(f, "entry({function})"),
            ProgramPoint::LoopHead { stmt, .. } => write!(f, "loop_head({stmt})"),
            ProgramPoint::BeforeStatement { stmt, .. } => write!(f, "before({stmt})"),
            ProgramPoint::ReturnPoint {
                function,
                site: ReturnSite::Statement(s),
            } => write!(f, "return({function}, {s})"),
            ProgramPoint::ReturnPoint {
                function,
                site: ReturnSite::BodyEnd,
            } => write!(f, "return({function}, end)"),
        }
    }
}
