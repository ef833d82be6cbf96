use super::*;
use crate::diag::Diagnostic;
use crate::expr::{parse_with_cursor, BinaryOp, Expr, ExprErrorKind};
use crate::lexer::{tokenize, Cursor, Tok, Token};

struct ParseError {
    code: &'static str,
    pos: Pos,
    message: String,
}

type PResult<T> = Result<T, ParseError>;

fn syntax(tok: &Token, message: impl Into<String>) -> ParseError {
    ParseError {
        code: "c.syntax",
        pos: tok.pos,
        message: message.into(),
    }
}

fn unsupported(tok: &Token, what: &str) -> ParseError {
    ParseError {
        code: "c.unsupported",
        pos: tok.pos,
        message: format!("unsupported construct: {what}"),
    }
}

/// Parses a translation unit of the C subset.
pub fn parse_program(source: &str) -> Result<Program, Vec<Diagnostic>> {
    let toks = tokenize(source)
        .map_err(|e| vec![Diagnostic::error("c.syntax", e.message).at("", e.pos.line, e.pos.column)])?;
    let mut p = CParser {
        cursor: Cursor::new(&toks),
        next_id: 0,
    };
    p.program()
        .map_err(|e| vec![Diagnostic::error(e.code, e.message).at("", e.pos.line, e.pos.column)])
}

struct CParser<'t> {
    cursor: Cursor<'t>,
    next_id: u32,
}

const UNSUPPORTED_TYPES: &[&str] = &[
    "char", "short", "long", "unsigned", "signed", "float", "double", "_Bool", "struct", "union", "enum", "typedef",
    "const", "volatile", "static",
];

const UNSUPPORTED_STATEMENTS: &[&str] = &["do", "break", "continue", "goto", "switch", "case", "default"];

impl<'t> CParser<'t> {
    fn fresh(&mut self) -> StmtId {
        self.next_id += 1;
        StmtId(self.next_id)
    }

    fn peek(&self) -> &'t Token {
        self.cursor.peek()
    }

    fn expect(&mut self, p: &str) -> PResult<&'t Token> {
        let tok = self.peek();
        if self.cursor.eat_punct(p) {
            Ok(tok)
        } else {
            Err(syntax(tok, format!("expected `{p}`, found {}", tok.tok)))
        }
    }

    fn ident(&mut self) -> PResult<(String, &'t Token)> {
        let tok = self.cursor.bump();
        match &tok.tok {
            Tok::Ident(name) if !crate::expr::is_reserved_word(name) => Ok((name.clone(), tok)),
            other => Err(syntax(tok, format!("expected identifier, found {other}"))),
        }
    }

    fn check_type_keyword(&self) -> PResult<()> {
        let tok = self.peek();
        if let Tok::Ident(name) = &tok.tok {
            if UNSUPPORTED_TYPES.contains(&name.as_str()) {
                return Err(unsupported(tok, &format!("type or qualifier `{name}`")));
            }
        }
        Ok(())
    }

    fn reject_declarator_suffix(&self) -> PResult<()> {
        let tok = self.peek();
        if matches!(tok.tok, Tok::Punct("*")) {
            return Err(unsupported(tok, "pointer declarator"));
        }
        Ok(())
    }

    fn program(&mut self) -> PResult<Program> {
        let mut items = Vec::new();
        while !self.cursor.at_eof() {
            items.push(self.item()?);
        }
        Ok(Program { items, file_name: None })
    }

    fn return_type(&mut self) -> PResult<ReturnType> {
        self.check_type_keyword()?;
        let tok = self.cursor.bump();
        match &tok.tok {
            Tok::Ident(t) if t == "int" => Ok(ReturnType::Int),
            Tok::Ident(t) if t == "void" => Ok(ReturnType::Void),
            other => Err(syntax(tok, format!("expected `int` or `void`, found {other}"))),
        }
    }

    fn item(&mut self) -> PResult<Item> {
        let start = self.peek().pos;
        let is_extern = self.cursor.is_ident("extern");
        if is_extern {
            self.cursor.bump();
        }
        let type_tok = self.peek();
        let return_type = self.return_type()?;
        self.reject_declarator_suffix()?;
        let (name, _) = self.ident()?;
        if self.cursor.is_punct("(") {
            let params = self.param_list()?;
            if self.cursor.eat_punct(";") {
                return Ok(Item::Prototype(Prototype {
                    pos: start,
                    is_extern,
                    return_type,
                    name,
                    params,
                }));
            }
            let params = match params {
                PrototypeParams::Unspecified | PrototypeParams::Void => Vec::new(),
                PrototypeParams::List(list) => list
                    .into_iter()
                    .map(|p| p.ok_or_else(|| syntax(type_tok, "parameter names are required in a definition")))
                    .collect::<PResult<_>>()?,
            };
            let body = self.block_body()?;
            return Ok(Item::Function(Function {
                pos: start,
                return_type,
                name,
                params,
                body,
            }));
        }
        if return_type == ReturnType::Void {
            return Err(syntax(type_tok, "variables cannot have type void"));
        }
        let vars = self.declarators(name)?;
        Ok(Item::Global(Decl { pos: start, vars }))
    }

    fn param_list(&mut self) -> PResult<PrototypeParams> {
        self.expect("(")?;
        if self.cursor.eat_punct(")") {
            return Ok(PrototypeParams::Unspecified);
        }
        if self.cursor.is_ident("void") && matches!(self.cursor.peek_at(1).tok, Tok::Punct(")")) {
            self.cursor.bump();
            self.cursor.bump();
            return Ok(PrototypeParams::Void);
        }
        let mut params = Vec::new();
        loop {
            let tok = self.peek();
            if self.cursor.is_punct("...") {
                return Err(unsupported(tok, "variadic parameters"));
            }
            self.check_type_keyword()?;
            if !self.cursor.is_ident("int") {
                return Err(syntax(tok, format!("expected `int` parameter, found {}", tok.tok)));
            }
            self.cursor.bump();
            self.reject_declarator_suffix()?;
            if let Tok::Ident(_) = &self.peek().tok {
                let (name, _) = self.ident()?;
                if self.cursor.is_punct("[") {
                    return Err(unsupported(self.peek(), "array parameter"));
                }
                params.push(Some(name));
            } else {
                params.push(None);
            }
            if !self.cursor.eat_punct(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(PrototypeParams::List(params))
    }

    /// Declarators after `int`, with the first name already consumed.
    fn declarators(&mut self, first: String) -> PResult<Vec<Declarator>> {
        let mut vars = Vec::new();
        let mut name = first;
        loop {
            if self.cursor.is_punct("[") {
                return Err(unsupported(self.peek(), "array declarator"));
            }
            let init = if self.cursor.eat_punct("=") {
                Some(self.rhs()?)
            } else {
                None
            };
            vars.push(Declarator { name, init });
            if !self.cursor.eat_punct(",") {
                break;
            }
            self.reject_declarator_suffix()?;
            name = self.ident()?.0;
        }
        self.expect(";")?;
        Ok(vars)
    }

    fn expr(&mut self) -> PResult<Expr> {
        let start = self.peek();
        let e = parse_with_cursor(&mut self.cursor).map_err(|e| ParseError {
            code: if e.kind == ExprErrorKind::Unsupported {
                "c.unsupported"
            } else {
                "c.syntax"
            },
            pos: e.pos,
            message: e.message,
        })?;
        if e.has_acsl() {
            return Err(syntax(start, "ACSL constructs are not allowed in program source"));
        }
        Ok(e)
    }

    fn rhs(&mut self) -> PResult<Rhs> {
        if let (Tok::Ident(name), Tok::Punct("(")) = (&self.peek().tok, &self.cursor.peek_at(1).tok) {
            if !crate::expr::is_reserved_word(name) {
                return Ok(Rhs::Call(self.call()?));
            }
        }
        Ok(Rhs::Expr(self.expr()?))
    }

    fn call(&mut self) -> PResult<Call> {
        let (callee, _) = self.ident()?;
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.cursor.eat_punct(")") {
            loop {
                if let (Tok::Ident(_), Tok::Punct("(")) = (&self.peek().tok, &self.cursor.peek_at(1).tok) {
                    return Err(unsupported(self.peek(), "nested call in argument"));
                }
                args.push(self.expr()?);
                if !self.cursor.eat_punct(",") {
                    break;
                }
            }
            self.expect(")")?;
        }
        Ok(Call { callee, args })
    }

    fn block_body(&mut self) -> PResult<Vec<Stmt>> {
        self.expect("{")?;
        let mut stmts = Vec::new();
        while !self.cursor.is_punct("}") {
            if self.cursor.at_eof() {
                return Err(syntax(self.peek(), "unexpected end of input, expected `}`"));
            }
            stmts.push(self.stmt()?);
        }
        self.cursor.bump();
        Ok(stmts)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let tok = self.peek();
        let pos = tok.pos;
        let id = self.fresh();
        let kind = match &tok.tok {
            Tok::Punct("{") => StmtKind::Block {
                stmts: self.block_body()?,
                origin: BlockOrigin::Plain,
            },
            Tok::Punct(";") => {
                self.cursor.bump();
                StmtKind::Empty
            }
            Tok::Ident(word) => match word.as_str() {
                "int" => {
                    self.cursor.bump();
                    self.reject_declarator_suffix()?;
                    let (name, _) = self.ident()?;
                    StmtKind::Decl(self.declarators(name)?)
                }
                "if" => {
                    self.cursor.bump();
                    self.expect("(")?;
                    let cond = self.expr()?;
                    self.expect(")")?;
                    let then_branch = Box::new(self.stmt()?);
                    let else_branch = if self.cursor.is_ident("else") {
                        self.cursor.bump();
                        Some(Box::new(self.stmt()?))
                    } else {
                        None
                    };
                    StmtKind::If {
                        cond,
                        then_branch,
                        else_branch,
                    }
                }
                "while" => {
                    self.cursor.bump();
                    self.expect("(")?;
                    let cond = self.expr()?;
                    self.expect(")")?;
                    StmtKind::While {
                        cond,
                        body: Box::new(self.stmt()?),
                    }
                }
                "for" => return self.for_stmt(id, pos),
                "return" => {
                    self.cursor.bump();
                    let value = if self.cursor.is_punct(";") {
                        None
                    } else {
                        Some(self.rhs()?)
                    };
                    self.expect(";")?;
                    StmtKind::Return(value)
                }
                "assert" => {
                    self.cursor.bump();
                    self.expect("(")?;
                    let cond = self.expr()?;
                    self.expect(")")?;
                    self.expect(";")?;
                    StmtKind::Assert(cond)
                }
                "reach_error" | "abort" => {
                    let is_reach = word == "reach_error";
                    self.cursor.bump();
                    self.expect("(")?;
                    self.expect(")")?;
                    self.expect(";")?;
                    if is_reach {
                        StmtKind::ReachError
                    } else {
                        StmtKind::Abort
                    }
                }
                w if UNSUPPORTED_STATEMENTS.contains(&w) => {
                    return Err(unsupported(tok, &format!("`{w}` statement")));
                }
                w if UNSUPPORTED_TYPES.contains(&w) => {
                    return Err(unsupported(tok, &format!("type or qualifier `{w}`")));
                }
                _ => {
                    let kind = self.simple_stmt()?;
                    self.expect(";")?;
                    kind
                }
            },
            Tok::Punct("++" | "--") => {
                let kind = self.simple_stmt()?;
                self.expect(";")?;
                kind
            }
            Tok::Punct("*") => return Err(unsupported(tok, "pointer dereference")),
            other => return Err(syntax(tok, format!("unexpected {other} at start of statement"))),
        };
        Ok(Stmt { id, pos, kind })
    }

    /// Assignment, increment/decrement or call, without the terminating `;`.
    fn simple_stmt(&mut self) -> PResult<StmtKind> {
        let tok = self.peek();
        if let Tok::Punct(op @ ("++" | "--")) = tok.tok {
            self.cursor.bump();
            let (target, _) = self.ident()?;
            return Ok(increment(target, op));
        }
        let Tok::Ident(_) = &tok.tok else {
            return Err(syntax(tok, format!("unexpected {}", tok.tok)));
        };
        if matches!(self.cursor.peek_at(1).tok, Tok::Punct("(")) {
            return Ok(StmtKind::Call(self.call()?));
        }
        let (target, _) = self.ident()?;
        let op_tok = self.cursor.bump();
        let Tok::Punct(op) = op_tok.tok else {
            return Err(syntax(op_tok, format!("expected assignment, found {}", op_tok.tok)));
        };
        let value = match op {
            "=" => self.rhs()?,
            "++" | "--" => return Ok(increment(target, op)),
            "+=" | "-=" | "*=" | "/=" | "%=" | "<<=" | ">>=" | "&=" | "|=" | "^=" => {
                let bin = BinaryOp::from_symbol(&op[..op.len() - 1]).expect("compound operator");
                let rhs = self.expr()?;
                Rhs::Expr(Expr::binary(bin, Expr::Var(target.clone()), rhs))
            }
            "[" => return Err(unsupported(op_tok, "array subscript")),
            "." | "->" => return Err(unsupported(op_tok, "member access")),
            _ => return Err(syntax(op_tok, format!("expected assignment, found `{op}`"))),
        };
        Ok(StmtKind::Assign { target, value })
    }

    fn for_stmt(&mut self, id: StmtId, pos: Pos) -> PResult<Stmt> {
        self.cursor.bump();
        self.expect("(")?;
        let mut outer = Vec::new();
        if !self.cursor.eat_punct(";") {
            let init_tok = self.peek();
            let init_id = self.fresh();
            let kind = if self.cursor.is_ident("int") {
                self.cursor.bump();
                self.reject_declarator_suffix()?;
                let (name, _) = self.ident()?;
                StmtKind::Decl(self.declarators(name)?)
            } else {
                let kind = self.simple_stmt()?;
                self.expect(";")?;
                kind
            };
            outer.push(Stmt {
                id: init_id,
                pos: init_tok.pos,
                kind,
            });
        }
        let cond = if self.cursor.is_punct(";") {
            Expr::Int(1)
        } else {
            self.expr()?
        };
        self.expect(";")?;
        let step = if self.cursor.is_punct(")") {
            None
        } else {
            let step_pos = self.peek().pos;
            let step_id = self.fresh();
            let kind = self.simple_stmt()?;
            Some(Stmt {
                id: step_id,
                pos: step_pos,
                kind,
            })
        };
        self.expect(")")?;
        let loop_id = self.fresh();
        let body_block_id = self.fresh();
        let body = self.stmt()?;
        let body_pos = body.pos;
        let mut body_stmts = vec![body];
        body_stmts.extend(step);
        outer.push(Stmt {
            id: loop_id,
            pos,
            kind: StmtKind::While {
                cond,
                body: Box::new(Stmt {
                    id: body_block_id,
                    pos: body_pos,
                    kind: StmtKind::Block {
                        stmts: body_stmts,
                        origin: BlockOrigin::ForBody,
                    },
                }),
            },
        });
        Ok(Stmt {
            id,
            pos,
            kind: StmtKind::Block {
                stmts: outer,
                origin: BlockOrigin::For,
            },
        })
    }
}

fn increment(target: String, op: &str) -> StmtKind {
    let bin = if op == "++" { BinaryOp::Add } else { BinaryOp::Sub };
    StmtKind::Assign {
        value: Rhs::Expr(Expr::binary(bin, Expr::Var(target.clone()), Expr::Int(1))),
        target,
    }
}
