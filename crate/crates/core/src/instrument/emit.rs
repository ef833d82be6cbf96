use std::fmt::Write as _;

use crate::csrc::{Call, Item, Program, PrototypeParams, Rhs, Stmt, StmtKind, BUILTIN_FUNCTIONS};
use crate::expr::{print_expression, Expr, UnaryOp};

/// How `assert(e)` statements are written out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssertStyle {
    /// `assert(e);` with `<assert.h>`.
    #[default]
    Assert,
    /// `if (!(e)) reach_error();`, the SV-COMP encoding.
    ReachError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitOptions {
    pub style: AssertStyle,
    pub prelude: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            style: AssertStyle::Assert,
            prelude: true,
        }
    }
}

pub fn emit_c(p: &Program) -> String {
    emit_c_with(p, EmitOptions::default())
}

pub fn emit_c_with(p: &Program, options: EmitOptions) -> String {
    let mut w = Writer {
        out: String::new(),
        style: options.style,
    };
    if options.prelude {
        if options.style == AssertStyle::Assert {
            w.out.push_str("#include <assert.h>\n");
        }
        w.out.push_str("extern void abort(void);\n");
        w.out.push_str("extern void reach_error(void);\n");
        w.out.push_str("extern int __VERIFIER_nondet_int(void);\n");
    }
    for item in &p.items {
        match item {
            Item::Global(d) => {
                let _ = writeln!(w.out, "int {};", declarators(&d.vars));
            }
            Item::Prototype(proto) => {
                if BUILTIN_FUNCTIONS.contains(&proto.name.as_str()) {
                    continue;
                }
                let params = match &proto.params {
                    PrototypeParams::Unspecified => String::new(),
                    PrototypeParams::Void => "void".to_owned(),
                    PrototypeParams::List(list) => list
                        .iter()
                        .map(|p| match p {
                            Some(name) => format!("int {name}"),
                            None => "int".to_owned(),
                        })
                        .collect::<Vec<_>>()
                        .join(", "),
                };
                let ext = if proto.is_extern { "extern " } else { "" };
                let _ = writeln!(w.out, "{ext}{} {}({params});", proto.return_type.as_str(), proto.name);
            }
            Item::Function(f) => {
                let params = if f.params.is_empty() {
                    "void".to_owned()
                } else {
                    f.params
                        .iter()
                        .map(|p| format!("int {p}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                };
                w.out.push('\n');
                let _ = writeln!(w.out, "{} {}({params}) {{", f.return_type.as_str(), f.name);
                for s in &f.body {
                    w.stmt(s, 1);
                }
                w.out.push_str("}\n");
            }
        }
    }
    w.out
}

fn declarators(vars: &[crate::csrc::Declarator]) -> String {
    vars.iter()
        .map(|v| match &v.init {
            Some(init) => format!("{} = {}", v.name, rhs(init)),
            None => v.name.clone(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn call(c: &Call) -> String {
    let args: Vec<String> = c.args.iter().map(print_expression).collect();
    format!("{}({})", c.callee, args.join(", "))
}

fn rhs(r: &Rhs) -> String {
    match r {
        Rhs::Expr(e) => print_expression(e),
        Rhs::Call(c) => call(c),
    }
}

/// Whether a following `else` would bind to an `if` nested at the end of `s`.
fn ends_open(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::If { else_branch: None, .. } => true,
        StmtKind::If {
            else_branch: Some(e), ..
        } => ends_open(e),
        StmtKind::While { body, .. } => ends_open(body),
        _ => false,
    }
}

struct Writer {
    out: String,
    style: AssertStyle,
}

impl Writer {
    fn line(&mut self, indent: usize, text: &str) {
        for _ in 0..indent {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn branch(&mut self, header: &str, s: &Stmt, indent: usize, force_braces: bool) {
        match &s.kind {
            StmtKind::Block { stmts, .. } => {
                self.line(indent, &format!("{header} {{"));
                for c in stmts {
                    self.stmt(c, indent + 1);
                }
                self.line(indent, "}");
            }
            _ if force_braces => {
                self.line(indent, &format!("{header} {{"));
                self.stmt(s, indent + 1);
                self.line(indent, "}");
            }
            _ => {
                self.line(indent, header);
                self.stmt(s, indent + 1);
            }
        }
    }

    fn stmt(&mut self, s: &Stmt, indent: usize) {
        match &s.kind {
            StmtKind::Decl(vars) => self.line(indent, &format!("int {};", declarators(vars))),
            StmtKind::Assign { target, value } => self.line(indent, &format!("{target} = {};", rhs(value))),
            StmtKind::Call(c) => self.line(indent, &format!("{};", call(c))),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let header = format!("if ({})", print_expression(cond));
                let open = else_branch.is_some() && ends_open(then_branch);
                self.branch(&header, then_branch, indent, open);
                if let Some(e) = else_branch {
                    self.branch("else", e, indent, false);
                }
            }
            StmtKind::While { cond, body } => {
                self.branch(&format!("while ({})", print_expression(cond)), body, indent, false)
            }
            StmtKind::Block { stmts, .. } => {
                self.line(indent, "{");
                for c in stmts {
                    self.stmt(c, indent + 1);
                }
                self.line(indent, "}");
            }
            StmtKind::Return(None) => self.line(indent, "return;"),
            StmtKind::Return(Some(v)) => self.line(indent, &format!("return {};", rhs(v))),
            StmtKind::Assert(e) => match self.style {
                AssertStyle::Assert => self.line(indent, &format!("assert({});", print_expression(e))),
                AssertStyle::ReachError => {
                    let negated = print_expression(&Expr::unary(UnaryOp::Not, e.clone()));
                    self.line(indent, &format!("if ({negated}) reach_error();"))
                }
            },
            StmtKind::ReachError => self.line(indent, "reach_error();"),
            StmtKind::Abort => self.line(indent, "abort();"),
            StmtKind::Empty => self.line(indent, ";"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csrc::parse_program;

    #[test]
    fn empty_unit_is_prelude_only() {
        let text = emit_c(&Program::default());
        assert!(text.starts_with("#include <assert.h>\n"));
        assert_eq!(parse_program(&text).unwrap().normalized(), Program::default());
    }

    #[test]
    fn round_trip_statement_forms() {
        let src = "extern int __VERIFIER_nondet_int(void);
int g = -3, h;
int twice(int);
int twice(int x) { return x * 2; }
void nothing() { ; }
int main() {
    int a = __VERIFIER_nondet_int();
    if (a > 0) if (a > 5) a = 5; else a = 4;
    if (a) { if (a > 1) g = 1; } else g = 2;
    for (int i = 0; i < 3; i++) { g += i; }
    while (g) g--;
    {
        int b = twice(a);
        nothing();
        assert(b != 7 || a == -1);
    }
    if (a < -100) abort();
    if (a < -200) reach_error();
    return 0;
}
";
        let p = parse_program(src).unwrap();
        let text = emit_c(&p);
        let q = parse_program(&text).unwrap();
        assert_eq!(p.normalized(), q.normalized(), "{text}");
    }

    #[test]
    fn reach_error_style() {
        let p = parse_program("int main() { int x = 1; assert(x == 1); return 0; }").unwrap();
        let text = emit_c_with(
            &p,
            EmitOptions {
                style: AssertStyle::ReachError,
                prelude: true,
            },
        );
        assert!(!text.contains("assert"));
        assert!(text.contains("if (!(x == 1)) reach_error();"), "{text}");
        parse_program(&text).unwrap();
    }
}
