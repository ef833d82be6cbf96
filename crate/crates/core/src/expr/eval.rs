use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{BinaryOp, Expr, ExprContext, UnaryOp};

/// Integers are 32-bit two's complement; every operation wraps, including
/// signed overflow. Shift counts are taken modulo 32.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalFault {
    #[error("division by zero")]
    DivisionByZero,
    #[error("remainder by zero")]
    RemainderByZero,
    #[error("variable `{0}` is not bound")]
    Unbound(String),
    #[error("pre-state value of `{0}` is not available")]
    UnboundPre(String),
    #[error("\\result is not available")]
    NoResult,
}

/// Read access to the state an expression is evaluated against.
pub trait Bindings {
    fn current(&self, name: &str) -> Option<i32>;
    fn pre(&self, name: &str) -> Option<i32>;
    fn result(&self) -> Option<i32>;
    fn is_parameter(&self, name: &str) -> bool;
}

/// Plain map-backed evaluation environment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalEnv {
    pub current: BTreeMap<String, i32>,
    /// Snapshot of globals and parameters at function entry.
    pub pre: BTreeMap<String, i32>,
    pub result: Option<i32>,
    pub parameters: BTreeSet<String>,
}

impl Bindings for EvalEnv {
    fn current(&self, name: &str) -> Option<i32> {
        self.current.get(name).copied()
    }

    fn pre(&self, name: &str) -> Option<i32> {
        self.pre.get(name).copied()
    }

    fn result(&self) -> Option<i32> {
        self.result
    }

    fn is_parameter(&self, name: &str) -> bool {
        self.parameters.contains(name)
    }
}

pub fn apply_unary(op: UnaryOp, v: i32) -> i32 {
    match op {
        UnaryOp::Neg => v.wrapping_neg(),
        UnaryOp::Not => i32::from(v == 0),
        UnaryOp::BitNot => !v,
    }
}

/// Applies a strict binary operator. `&&` and `||` are accepted here too but
/// callers that need short-circuiting must handle them before evaluating the
/// right operand.
pub fn apply_binary(op: BinaryOp, a: i32, b: i32) -> Result<i32, EvalFault> {
    use BinaryOp::*;
    Ok(match op {
        Mul => a.wrapping_mul(b),
        Div if b == 0 => return Err(EvalFault::DivisionByZero),
        Div => a.wrapping_div(b),
        Rem if b == 0 => return Err(EvalFault::RemainderByZero),
        Rem => a.wrapping_rem(b),
        Add => a.wrapping_add(b),
        Sub => a.wrapping_sub(b),
        Shl => a.wrapping_shl(b as u32),
        Shr => a.wrapping_shr(b as u32),
        Lt => i32::from(a < b),
        Le => i32::from(a <= b),
        Gt => i32::from(a > b),
        Ge => i32::from(a >= b),
        Eq => i32::from(a == b),
        Ne => i32::from(a != b),
        BitAnd => a & b,
        BitXor => a ^ b,
        BitOr => a | b,
        And => i32::from(a != 0 && b != 0),
        Or => i32::from(a != 0 || b != 0),
    })
}

/// Evaluates `e` against `env` in `context`.
///
/// In an `ensures` context a parameter reads its pre-call value, so `x` and
/// `\old(x)` coincide for parameters; globals read their current value.
pub fn evaluate<B: Bindings + ?Sized>(e: &Expr, env: &B, context: ExprContext) -> Result<i32, EvalFault> {
    match e {
        Expr::Int(v) => Ok(*v as i32),
        Expr::Var(x) => {
            if context == ExprContext::Ensures && env.is_parameter(x) {
                env.pre(x).ok_or_else(|| EvalFault::UnboundPre(x.clone()))
            } else {
                env.current(x).ok_or_else(|| EvalFault::Unbound(x.clone()))
            }
        }
        Expr::Old(x) | Expr::AtPre(x) => env.pre(x).ok_or_else(|| EvalFault::UnboundPre(x.clone())),
        Expr::Result => env.result().ok_or(EvalFault::NoResult),
        Expr::Unary(op, a) => Ok(apply_unary(*op, evaluate(a, env, context)?)),
        Expr::Binary(BinaryOp::And, a, b) => {
            if evaluate(a, env, context)? == 0 {
                Ok(0)
            } else {
                Ok(i32::from(evaluate(b, env, context)? != 0))
            }
        }
        Expr::Binary(BinaryOp::Or, a, b) => {
            if evaluate(a, env, context)? != 0 {
                Ok(1)
            } else {
                Ok(i32::from(evaluate(b, env, context)? != 0))
            }
        }
        Expr::Binary(op, a, b) => {
            let a = evaluate(a, env, context)?;
            let b = evaluate(b, env, context)?;
            apply_binary(*op, a, b)
        }
        Expr::Cond(c, t, f) => {
            if evaluate(c, env, context)? != 0 {
                evaluate(t, env, context)
            } else {
                evaluate(f, env, context)
            }
        }
    }
}
