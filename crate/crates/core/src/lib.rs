//! Toolchain for correctness witnesses extended with function contracts.

pub mod csrc;
pub mod diag;
pub mod expr;
pub mod instrument;
pub mod lexer;
pub mod lint;
pub mod lower;
pub mod validate;
pub mod witness;
