use super::{Expr, UnaryOp};

const PREC_COND: u8 = 0;
const PREC_UNARY: u8 = 11;
const PREC_PRIMARY: u8 = 12;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Cond(..) => PREC_COND,
        Expr::Binary(op, ..) => op.precedence(),
        Expr::Unary(..) => PREC_UNARY,
        _ => PREC_PRIMARY,
    }
}

/// Renders `e` with the minimal parentheses needed to reparse to the same tree.
pub fn print_expression(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, &mut out);
    out
}

fn write_child(e: &Expr, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Int(v) => out.push_str(&v.to_string()),
        Expr::Var(x) => out.push_str(x),
        Expr::Result => out.push_str("\\result"),
        Expr::Old(x) => {
            out.push_str("\\old(");
            out.push_str(x);
            out.push(')');
        }
        Expr::AtPre(x) => {
            out.push_str("\\at(");
            out.push_str(x);
            out.push_str(", Pre)");
        }
        Expr::Unary(op, a) => {
            out.push_str(op.symbol());
            let parens = precedence(a) < PREC_UNARY;
            // `- -x` must not lex as a decrement.
            if !parens && *op == UnaryOp::Neg && matches!(**a, Expr::Unary(UnaryOp::Neg, _)) {
                out.push(' ');
            }
            write_child(a, parens, out);
        }
        Expr::Binary(op, a, b) => {
            let p = op.precedence();
            write_child(a, precedence(a) < p, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_child(b, precedence(b) <= p, out);
        }
        Expr::Cond(c, t, f) => {
            write_child(c, precedence(c) == PREC_COND, out);
            out.push_str(" ? ");
            write_expr(t, out);
            out.push_str(" : ");
            write_expr(f, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_expression, BinaryOp, ExprContext};
    use super::*;
    use crate::witness::ExpressionFormat;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(print_expression(&Expr::Int(1)), "1");
        let e = Expr::binary(
            BinaryOp::Eq,
            Expr::Result,
            Expr::binary(BinaryOp::Mul, Expr::var("a"), Expr::var("b")),
        );
        assert_eq!(print_expression(&e), "\\result == a * b");
        let nested = Expr::cond(
            Expr::cond(Expr::var("a"), Expr::var("b"), Expr::var("c")),
            Expr::var("d"),
            Expr::var("e"),
        );
        assert_eq!(print_expression(&nested), "(a ? b : c) ? d : e");
        let e = Expr::binary(
            BinaryOp::Sub,
            Expr::var("a"),
            Expr::binary(BinaryOp::Sub, Expr::var("b"), Expr::var("c")),
        );
        assert_eq!(print_expression(&e), "a - (b - c)");
        let e = Expr::unary(UnaryOp::Neg, Expr::unary(UnaryOp::Neg, Expr::var("x")));
        assert_eq!(print_expression(&e), "- -x");
    }

    fn ident() -> impl Strategy<Value = String> {
        prop_oneof![Just("a"), Just("b"), Just("g"), Just("x_1")].prop_map(str::to_owned)
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            any::<u32>().prop_map(Expr::Int),
            ident().prop_map(Expr::Var),
            ident().prop_map(Expr::Old),
            ident().prop_map(Expr::AtPre),
            Just(Expr::Result),
        ];
        leaf.prop_recursive(6, 64, 3, |inner| {
            prop_oneof![
                (
                    prop_oneof![Just(UnaryOp::Neg), Just(UnaryOp::Not), Just(UnaryOp::BitNot)],
                    inner.clone()
                )
                    .prop_map(|(op, a)| Expr::unary(op, a)),
                (0..BinaryOp::ALL.len(), inner.clone(), inner.clone()).prop_map(|(i, a, b)| Expr::binary(
                    BinaryOp::ALL[i],
                    a,
                    b
                )),
                (inner.clone(), inner.clone(), inner).prop_map(|(c, t, e)| Expr::cond(c, t, e)),
            ]
        })
    }

    /// Reparse ignoring context gating: every ACSL node shape is checked by
    /// parsing in the one context that admits it.
    fn reparse(text: &str) -> Expr {
        let toks = crate::lexer::tokenize(text).unwrap();
        let mut cursor = crate::lexer::Cursor::new(&toks);
        let e = super::super::parse_with_cursor(&mut cursor).unwrap();
        assert!(cursor.at_eof(), "trailing input in {text}");
        e
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in arb_expr()) {
            let text = print_expression(&e);
            prop_assert_eq!(reparse(&text), e);
        }

        #[test]
        fn gated_round_trip_in_ensures(e in arb_expr()) {
            let e = e.map(&mut |n| match n {
                Expr::AtPre(x) => Expr::Old(x),
                other => other,
            });
            let text = print_expression(&e);
            let back = parse_expression(&text, ExpressionFormat::AcslExpression, ExprContext::Ensures);
            prop_assert_eq!(back.unwrap(), e);
        }
    }
}
