use std::fmt;

use super::{BinaryOp, Expr, ExprContext, UnaryOp};
use crate::lexer::{tokenize, Cursor, Pos, Tok, Token};
use crate::witness::ExpressionFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExprErrorKind {
    /// Malformed text.
    Syntax,
    /// A construct outside the subset (calls, assignments, pointers, ...).
    Unsupported,
    /// An ACSL keyword used with format `c_expression`.
    KeywordFormat,
    /// An ACSL keyword used in a clause that does not admit it.
    KeywordContext,
    /// `\at` with a label other than `Pre`.
    AtLabel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub kind: ExprErrorKind,
    /// Byte offset into the parsed text.
    pub offset: usize,
    /// Position of the offending token in the parsed text.
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at offset {})", self.message, self.offset)
    }
}

fn err(kind: ExprErrorKind, tok: &Token, message: impl Into<String>) -> ExprError {
    ExprError {
        kind,
        offset: tok.offset,
        pos: tok.pos,
        message: message.into(),
    }
}

/// Parses `text` as an expression in `format`, admitted in `context`.
///
/// ACSL nodes are accepted only with `acsl_expression`; `\old` and `\result`
/// only in `ensures`, `\at(_, Pre)` only in invariants. All violations found
/// are returned together.
pub fn parse_expression(text: &str, format: ExpressionFormat, context: ExprContext) -> Result<Expr, Vec<ExprError>> {
    let toks = tokenize(text).map_err(|e| {
        vec![ExprError {
            kind: ExprErrorKind::Syntax,
            offset: e.offset,
            pos: e.pos,
            message: e.message,
        }]
    })?;
    let mut cursor = Cursor::new(&toks);
    let mut parser = ExprParser::new(&mut cursor);
    let expr = parser.expr();
    let mut errors = std::mem::take(&mut parser.soft);
    let expr = match expr {
        Ok(e) => {
            if !cursor.at_eof() {
                errors.push(err(
                    ExprErrorKind::Syntax,
                    cursor.peek(),
                    format!("unexpected {} after expression", cursor.peek().tok),
                ));
            }
            e
        }
        Err(e) => {
            errors.insert(0, e);
            return Err(errors);
        }
    };
    for (node, tok) in parser_acsl_sites(&toks) {
        let allowed_here = match node {
            AcslSite::Old | AcslSite::Result => context == ExprContext::Ensures,
            AcslSite::At => context == ExprContext::Invariant,
        };
        let spelled = match node {
            AcslSite::Old => "\\old",
            AcslSite::Result => "\\result",
            AcslSite::At => "\\at(_, Pre)",
        };
        if format == ExpressionFormat::CExpression {
            errors.push(err(
                ExprErrorKind::KeywordFormat,
                tok,
                format!("{spelled} used with format c_expression"),
            ));
        } else if !allowed_here {
            errors.push(err(
                ExprErrorKind::KeywordContext,
                tok,
                format!("{spelled} not allowed in {context}"),
            ));
        }
    }
    if errors.is_empty() {
        Ok(expr)
    } else {
        errors.sort_by_key(|e| e.offset);
        Err(errors)
    }
}

enum AcslSite {
    Old,
    Result,
    At,
}

fn parser_acsl_sites(toks: &[Token]) -> impl Iterator<Item = (AcslSite, &Token)> {
    toks.iter().filter_map(|t| match &t.tok {
        Tok::Keyword(k) if k == "old" => Some((AcslSite::Old, t)),
        Tok::Keyword(k) if k == "result" => Some((AcslSite::Result, t)),
        Tok::Keyword(k) if k == "at" => Some((AcslSite::At, t)),
        _ => None,
    })
}

/// Parses one expression from `cursor` without context gating; ACSL nodes
/// are returned as-is for the caller to reject. Used by the C front end.
pub fn parse_with_cursor(cursor: &mut Cursor<'_>) -> Result<Expr, ExprError> {
    let mut parser = ExprParser::new(cursor);
    let e = parser.expr()?;
    match parser.soft.into_iter().next() {
        Some(soft) => Err(soft),
        None => Ok(e),
    }
}

struct ExprParser<'c, 't> {
    cursor: &'c mut Cursor<'t>,
    /// Errors that do not prevent building a tree.
    soft: Vec<ExprError>,
}

const MAX_DEPTH: usize = 256;

impl<'c, 't> ExprParser<'c, 't> {
    fn new(cursor: &'c mut Cursor<'t>) -> Self {
        ExprParser {
            cursor,
            soft: Vec::new(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        self.conditional(0)
    }

    fn conditional(&mut self, depth: usize) -> Result<Expr, ExprError> {
        if depth > MAX_DEPTH {
            return Err(err(
                ExprErrorKind::Syntax,
                self.cursor.peek(),
                "expression nested too deeply",
            ));
        }
        let c = self.binary(1, depth)?;
        if !self.cursor.eat_punct("?") {
            return Ok(c);
        }
        let t = self.conditional(depth + 1)?;
        self.expect(":")?;
        let e = self.conditional(depth + 1)?;
        Ok(Expr::cond(c, t, e))
    }

    fn binary(&mut self, min_prec: u8, depth: usize) -> Result<Expr, ExprError> {
        let mut lhs = self.unary(depth)?;
        loop {
            let tok = self.cursor.peek();
            let op = match &tok.tok {
                Tok::Punct(p) => {
                    if let Some(message) = side_effect_operator(p) {
                        return Err(err(ExprErrorKind::Unsupported, tok, message));
                    }
                    match BinaryOp::from_symbol(p) {
                        Some(op) if op.precedence() >= min_prec => op,
                        _ => break,
                    }
                }
                _ => break,
            };
            self.cursor.bump();
            let rhs = self.binary(op.precedence() + 1, depth + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self, depth: usize) -> Result<Expr, ExprError> {
        if depth > MAX_DEPTH {
            return Err(err(
                ExprErrorKind::Syntax,
                self.cursor.peek(),
                "expression nested too deeply",
            ));
        }
        let tok = self.cursor.peek();
        let op = match &tok.tok {
            Tok::Punct("-") => Some(UnaryOp::Neg),
            Tok::Punct("!") => Some(UnaryOp::Not),
            Tok::Punct("~") => Some(UnaryOp::BitNot),
            Tok::Punct("+") => {
                self.cursor.bump();
                return self.unary(depth + 1);
            }
            Tok::Punct("*") => {
                return Err(err(
                    ExprErrorKind::Unsupported,
                    tok,
                    "unsupported construct: pointer dereference",
                ))
            }
            Tok::Punct("&") => {
                return Err(err(
                    ExprErrorKind::Unsupported,
                    tok,
                    "unsupported construct: address-of",
                ))
            }
            Tok::Punct("++" | "--") => {
                return Err(err(
                    ExprErrorKind::Unsupported,
                    tok,
                    "increment and decrement have side effects",
                ))
            }
            _ => None,
        };
        match op {
            Some(op) => {
                self.cursor.bump();
                Ok(Expr::unary(op, self.unary(depth + 1)?))
            }
            None => self.postfix(depth),
        }
    }

    fn postfix(&mut self, depth: usize) -> Result<Expr, ExprError> {
        let e = self.primary(depth)?;
        let tok = self.cursor.peek();
        match &tok.tok {
            Tok::Punct("(") if matches!(e, Expr::Var(_)) => Err(err(
                ExprErrorKind::Unsupported,
                tok,
                "function calls are not allowed in expressions",
            )),
            Tok::Punct("[") => Err(err(
                ExprErrorKind::Unsupported,
                tok,
                "unsupported construct: array subscript",
            )),
            Tok::Punct("." | "->") => Err(err(
                ExprErrorKind::Unsupported,
                tok,
                "unsupported construct: member access",
            )),
            Tok::Punct("++" | "--") => Err(err(
                ExprErrorKind::Unsupported,
                tok,
                "increment and decrement have side effects",
            )),
            _ => Ok(e),
        }
    }

    fn primary(&mut self, depth: usize) -> Result<Expr, ExprError> {
        let tok = self.cursor.bump();
        match &tok.tok {
            Tok::Int(v) => u32::try_from(*v)
                .map(Expr::Int)
                .map_err(|_| err(ExprErrorKind::Syntax, tok, format!("integer literal {v} out of range"))),
            Tok::Ident(name) => {
                if is_type_keyword(name) {
                    return Err(err(
                        ExprErrorKind::Unsupported,
                        tok,
                        format!("unsupported construct: `{name}`"),
                    ));
                }
                if is_reserved(name) {
                    return Err(err(ExprErrorKind::Syntax, tok, format!("unexpected keyword `{name}`")));
                }
                Ok(Expr::Var(name.clone()))
            }
            Tok::Punct("(") => {
                if let Tok::Ident(name) = &self.cursor.peek().tok {
                    if is_type_keyword(name) {
                        return Err(err(ExprErrorKind::Unsupported, tok, "casts are not supported"));
                    }
                }
                let e = self.conditional(depth + 1)?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Keyword(k) => match k.as_str() {
                "result" => Ok(Expr::Result),
                "old" => {
                    self.expect("(")?;
                    let name = self.acsl_variable("\\old")?;
                    self.expect(")")?;
                    Ok(Expr::Old(name))
                }
                "at" => {
                    self.expect("(")?;
                    let name = self.acsl_variable("\\at")?;
                    self.expect(",")?;
                    let label = self.cursor.bump();
                    match &label.tok {
                        Tok::Ident(l) if l == "Pre" => {}
                        Tok::Ident(l) => self.soft.push(err(
                            ExprErrorKind::AtLabel,
                            label,
                            format!("\\at label `{l}` not allowed; only Pre is supported"),
                        )),
                        other => {
                            return Err(err(
                                ExprErrorKind::Syntax,
                                label,
                                format!("expected label, found {other}"),
                            ))
                        }
                    }
                    self.expect(")")?;
                    Ok(Expr::AtPre(name))
                }
                other => Err(err(
                    ExprErrorKind::Unsupported,
                    tok,
                    format!("unsupported ACSL construct `\\{other}`"),
                )),
            },
            Tok::Eof => Err(err(ExprErrorKind::Syntax, tok, "unexpected end of expression")),
            other => Err(err(ExprErrorKind::Syntax, tok, format!("unexpected {other}"))),
        }
    }

    fn acsl_variable(&mut self, keyword: &str) -> Result<String, ExprError> {
        let tok = self.cursor.bump();
        match (&tok.tok, &self.cursor.peek().tok) {
            (Tok::Ident(name), Tok::Punct(")" | ",")) if !is_reserved(name) => Ok(name.clone()),
            _ => Err(err(
                ExprErrorKind::Syntax,
                tok,
                format!("{keyword} only accepts a variable name"),
            )),
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), ExprError> {
        let tok = self.cursor.peek();
        if self.cursor.eat_punct(p) {
            Ok(())
        } else {
            Err(err(
                ExprErrorKind::Syntax,
                tok,
                format!("expected `{p}`, found {}", tok.tok),
            ))
        }
    }
}

fn side_effect_operator(p: &str) -> Option<&'static str> {
    match p {
        "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "<<=" | ">>=" | "&=" | "|=" | "^=" => {
            Some("assignments are not allowed in expressions")
        }
        _ => None,
    }
}

fn is_type_keyword(name: &str) -> bool {
    matches!(
        name,
        "int"
            | "unsigned"
            | "signed"
            | "long"
            | "short"
            | "char"
            | "float"
            | "double"
            | "void"
            | "struct"
            | "union"
            | "enum"
            | "const"
            | "_Bool"
    )
}

pub(crate) fn is_reserved(name: &str) -> bool {
    is_type_keyword(name)
        || matches!(
            name,
            "if" | "else"
                | "while"
                | "for"
                | "do"
                | "return"
                | "break"
                | "continue"
                | "sizeof"
                | "extern"
                | "static"
                | "goto"
                | "switch"
                | "case"
                | "default"
                | "typedef"
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ExpressionFormat::*;

    fn acsl(text: &str, ctx: ExprContext) -> Result<Expr, Vec<ExprError>> {
        parse_expression(text, AcslExpression, ctx)
    }

    fn kinds(r: Result<Expr, Vec<ExprError>>) -> Vec<ExprErrorKind> {
        r.unwrap_err().into_iter().map(|e| e.kind).collect()
    }

    #[test]
    fn result_equals_product() {
        let e = acsl("\\result == a*b", ExprContext::Ensures).unwrap();
        assert_eq!(
            e,
            Expr::binary(
                BinaryOp::Eq,
                Expr::Result,
                Expr::binary(BinaryOp::Mul, Expr::var("a"), Expr::var("b"))
            )
        );
    }

    #[test]
    fn old_in_ensures() {
        let e = acsl("g < \\old(g)", ExprContext::Ensures).unwrap();
        assert_eq!(e, Expr::binary(BinaryOp::Lt, Expr::var("g"), Expr::Old("g".into())));
    }

    #[test]
    fn at_label_must_be_pre() {
        let errs = acsl("\\at(x, Post)", ExprContext::Invariant).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].kind, ExprErrorKind::AtLabel);
        assert!(errs[0].message.contains("only Pre"));
        assert_eq!(
            acsl("\\at(x, Pre) <= x", ExprContext::Invariant).unwrap(),
            Expr::binary(BinaryOp::Le, Expr::AtPre("x".into()), Expr::var("x"))
        );
    }

    #[test]
    fn default_clause_literal() {
        let e = parse_expression("1", CExpression, ExprContext::Requires).unwrap();
        assert_eq!(e, Expr::Int(1));
    }

    #[test]
    fn keyword_gating() {
        assert_eq!(
            kinds(parse_expression("\\old(g) > 0", CExpression, ExprContext::Ensures)),
            [ExprErrorKind::KeywordFormat]
        );
        let errs = acsl("\\at(g, Pre) > 0", ExprContext::Ensures).unwrap_err();
        assert_eq!(errs[0].kind, ExprErrorKind::KeywordContext);
        assert_eq!(errs[0].message, "\\at(_, Pre) not allowed in ensures");
        assert_eq!(
            kinds(acsl("\\result", ExprContext::Requires)),
            [ExprErrorKind::KeywordContext]
        );
        assert_eq!(
            kinds(acsl("\\old(x)", ExprContext::Requires)),
            [ExprErrorKind::KeywordContext]
        );
        assert_eq!(
            kinds(acsl("\\result", ExprContext::Invariant)),
            [ExprErrorKind::KeywordContext]
        );
        // Both problems are reported.
        assert_eq!(
            kinds(parse_expression("\\at(x, Here)", CExpression, ExprContext::Invariant)),
            [ExprErrorKind::KeywordFormat, ExprErrorKind::AtLabel]
        );
    }

    #[test]
    fn precedence_and_associativity() {
        use BinaryOp::*;
        let e = parse_expression("a - b - c * d << 1 < e || f && g", CExpression, ExprContext::Invariant).unwrap();
        let sub = Expr::binary(
            Sub,
            Expr::binary(Sub, Expr::var("a"), Expr::var("b")),
            Expr::binary(Mul, Expr::var("c"), Expr::var("d")),
        );
        let lt = Expr::binary(Lt, Expr::binary(Shl, sub, Expr::Int(1)), Expr::var("e"));
        let expected = Expr::binary(Or, lt, Expr::binary(And, Expr::var("f"), Expr::var("g")));
        assert_eq!(e, expected);

        let e = parse_expression("a ? b : c ? d : e", CExpression, ExprContext::Invariant).unwrap();
        assert_eq!(
            e,
            Expr::cond(
                Expr::var("a"),
                Expr::var("b"),
                Expr::cond(Expr::var("c"), Expr::var("d"), Expr::var("e"))
            )
        );
    }

    #[test]
    fn side_effects_rejected() {
        for text in [
            "x = 1", "x++", "--x", "f(x)", "*p", "&x", "a[1]", "(int)x", "x += 2", "s.f",
        ] {
            let errs = parse_expression(text, CExpression, ExprContext::Invariant).unwrap_err();
            assert_eq!(errs[0].kind, ExprErrorKind::Unsupported, "{text}");
        }
        for text in ["", "(a", "a b", "\\old(g + 1)", "1 +", "a, b", "3 ?"] {
            assert!(acsl(text, ExprContext::Ensures).is_err(), "{text}");
        }
    }

    #[test]
    fn literals() {
        let e = parse_expression("0x10 + 010 + 4294967295", CExpression, ExprContext::Invariant).unwrap();
        assert!(matches!(e, Expr::Binary(BinaryOp::Add, _, _)));
        assert!(parse_expression("4294967296", CExpression, ExprContext::Invariant).is_err());
    }
}
