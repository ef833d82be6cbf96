//! Side-effect-free C expressions extended with the ACSL constructs
//! `\old(x)`, `\at(x, Pre)` and `\result`.
//!
//! The subset has integer literals, variables, the C unary operators `- ! ~`,
//! the C binary operators with their usual precedence and associativity, and
//! the conditional operator. Assignments, increments, the comma operator,
//! calls, casts, pointers and arrays are rejected by the parser.

mod eval;
mod parse;
mod print;

use std::collections::BTreeSet;
use std::fmt;

pub use eval::{apply_binary, apply_unary, evaluate, Bindings, EvalEnv, EvalFault};
pub(crate) use parse::is_reserved as is_reserved_word;
pub use parse::{parse_expression, parse_with_cursor, ExprError, ExprErrorKind};
pub use print::print_expression;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Neg,
    Not,
    BitNot,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Not => "!",
            UnaryOp::BitNot => "~",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Mul,
    Div,
    Rem,
    Add,
    Sub,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitXor,
    BitOr,
    And,
    Or,
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 18] = [
        BinaryOp::Mul,
        BinaryOp::Div,
        BinaryOp::Rem,
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Shl,
        BinaryOp::Shr,
        BinaryOp::Lt,
        BinaryOp::Le,
        BinaryOp::Gt,
        BinaryOp::Ge,
        BinaryOp::Eq,
        BinaryOp::Ne,
        BinaryOp::BitAnd,
        BinaryOp::BitXor,
        BinaryOp::BitOr,
        BinaryOp::And,
        BinaryOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        use BinaryOp::*;
        match self {
            Mul => "*",
            Div => "/",
            Rem => "%",
            Add => "+",
            Sub => "-",
            Shl => "<<",
            Shr => ">>",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            Eq => "==",
            Ne => "!=",
            BitAnd => "&",
            BitXor => "^",
            BitOr => "|",
            And => "&&",
            Or => "||",
        }
    }

    /// Binding strength; larger binds tighter. All binary operators are
    /// left-associative.
    pub fn precedence(self) -> u8 {
        use BinaryOp::*;
        match self {
            Or => 1,
            And => 2,
            BitOr => 3,
            BitXor => 4,
            BitAnd => 5,
            Eq | Ne => 6,
            Lt | Le | Gt | Ge => 7,
            Shl | Shr => 8,
            Add | Sub => 9,
            Mul | Div | Rem => 10,
        }
    }

    pub fn from_symbol(sym: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.symbol() == sym)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(u32),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Cond(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `\old(x)`
    Old(String),
    /// `\at(x, Pre)`
    AtPre(String),
    /// `\result`
    Result,
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Var(name.to_owned())
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn unary(op: UnaryOp, operand: Expr) -> Self {
        Expr::Unary(op, Box::new(operand))
    }

    pub fn cond(c: Expr, t: Expr, e: Expr) -> Self {
        Expr::Cond(Box::new(c), Box::new(t), Box::new(e))
    }

    /// True if any ACSL node occurs in the tree.
    pub fn has_acsl(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Old(_) | Expr::AtPre(_) | Expr::Result));
        found
    }

    /// Pre-order traversal.
    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Unary(_, a) => a.walk(f),
            Expr::Binary(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Cond(a, b, c) => {
                a.walk(f);
                b.walk(f);
                c.walk(f);
            }
            _ => {}
        }
    }

    /// Bottom-up rewrite: `f` may replace each node after its children were rewritten.
    pub fn map(self, f: &mut impl FnMut(Expr) -> Expr) -> Expr {
        let rebuilt = match self {
            Expr::Unary(op, a) => Expr::Unary(op, Box::new(a.map(f))),
            Expr::Binary(op, a, b) => Expr::Binary(op, Box::new(a.map(f)), Box::new(b.map(f))),
            Expr::Cond(a, b, c) => Expr::Cond(Box::new(a.map(f)), Box::new(b.map(f)), Box::new(c.map(f))),
            leaf => leaf,
        };
        f(rebuilt)
    }

    pub fn is_true_literal(&self) -> bool {
        matches!(self, Expr::Int(1))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_expression(self))
    }
}

/// Which evaluation state a variable occurrence reads.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarUse {
    /// A plain occurrence of `x`.
    Current(String),
    /// `\old(x)` or `\at(x, Pre)`.
    Pre(String),
    /// `\result`.
    Result,
}

impl VarUse {
    pub fn name(&self) -> Option<&str> {
        match self {
            VarUse::Current(n) | VarUse::Pre(n) => Some(n),
            VarUse::Result => None,
        }
    }
}

pub fn free_variables(e: &Expr) -> BTreeSet<VarUse> {
    let mut out = BTreeSet::new();
    e.walk(&mut |node| match node {
        Expr::Var(x) => {
            out.insert(VarUse::Current(x.clone()));
        }
        Expr::Old(x) | Expr::AtPre(x) => {
            out.insert(VarUse::Pre(x.clone()));
        }
        Expr::Result => {
            out.insert(VarUse::Result);
        }
        _ => {}
    });
    out
}

/// Where an expression is evaluated; decides which ACSL constructs are
/// allowed and how parameters are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExprContext {
    Requires,
    Ensures,
    Invariant,
}

impl ExprContext {
    pub fn as_str(self) -> &'static str {
        match self {
            ExprContext::Requires => "requires",
            ExprContext::Ensures => "ensures",
            ExprContext::Invariant => "invariant",
        }
    }
}

impl fmt::Display for ExprContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_variables_classify_uses() {
        let e = Expr::binary(BinaryOp::Lt, Expr::var("g"), Expr::Old("g".into()));
        let fv: Vec<_> = free_variables(&e).into_iter().collect();
        assert_eq!(fv, [VarUse::Current("g".into()), VarUse::Pre("g".into())]);

        assert!(free_variables(&Expr::Int(1)).is_empty());

        let e = Expr::binary(BinaryOp::Eq, Expr::Result, Expr::var("a"));
        let fv: Vec<_> = free_variables(&e).into_iter().collect();
        assert_eq!(fv, [VarUse::Current("a".into()), VarUse::Result]);
    }
}
