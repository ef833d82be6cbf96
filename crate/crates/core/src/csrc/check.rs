use std::collections::{BTreeMap, HashSet};

use super::*;
use crate::diag::Diagnostic;
use crate::expr::{free_variables, VarUse};

/// Identifier prefix reserved for variables introduced by instrumentation.
pub const GHOST_PREFIX: &str = "__wit_";

#[derive(Clone, Copy)]
struct Signature {
    return_type: ReturnType,
    /// `None` when the arity is unknown (`f()` prototype without definition).
    arity: Option<usize>,
    defined: bool,
}

struct Checker<'p> {
    file: String,
    signatures: BTreeMap<&'p str, Signature>,
    globals: HashSet<&'p str>,
    diags: Vec<Diagnostic>,
}

/// Semantic checks the front end does not perform while parsing: name
/// resolution, arity, return forms and the presence of `main`. Uses of the
/// reserved `__wit_` prefix are reported with code `GHOST`, everything else
/// with `PROGRAM`.
pub fn check_program(program: &Program) -> Vec<Diagnostic> {
    let mut c = Checker {
        file: program.file_name.clone().unwrap_or_default(),
        signatures: BTreeMap::new(),
        globals: HashSet::new(),
        diags: Vec::new(),
    };
    c.collect(program);
    for item in &program.items {
        match item {
            Item::Global(d) => {
                for v in &d.vars {
                    match &v.init {
                        Some(Rhs::Call(_)) => c.error(d.pos, "global initializer must be a constant expression"),
                        Some(Rhs::Expr(e)) if !free_variables(e).is_empty() => {
                            c.error(d.pos, "global initializer must be a constant expression")
                        }
                        _ => {}
                    }
                }
            }
            Item::Function(f) => c.function(f),
            Item::Prototype(_) => {}
        }
    }
    match program.function("main") {
        None => c
            .diags
            .push(Diagnostic::error("PROGRAM", "program has no `main` function").at(c.file.clone(), 1, 1)),
        Some(m) => {
            if m.return_type != ReturnType::Int || !m.params.is_empty() {
                c.error(m.pos, "`main` must be declared as `int main()`");
            }
        }
    }
    c.diags
}

impl<'p> Checker<'p> {
    fn error(&mut self, pos: Pos, message: impl Into<String>) {
        self.diags
            .push(Diagnostic::error("PROGRAM", message).at(self.file.clone(), pos.line, pos.column));
    }

    fn ghost(&mut self, pos: Pos, name: &str) {
        if name.starts_with(GHOST_PREFIX) {
            self.diags.push(
                Diagnostic::error(
                    "GHOST",
                    format!("identifier `{name}` uses the reserved prefix `{GHOST_PREFIX}`"),
                )
                .at(self.file.clone(), pos.line, pos.column),
            );
        }
    }

    fn collect(&mut self, program: &'p Program) {
        for item in &program.items {
            match item {
                Item::Global(d) => {
                    for v in &d.vars {
                        self.ghost(d.pos, &v.name);
                        if !self.globals.insert(&v.name) {
                            self.error(d.pos, format!("global `{}` declared twice", v.name));
                        }
                    }
                }
                Item::Function(f) => {
                    self.ghost(f.pos, &f.name);
                    if BUILTIN_FUNCTIONS.contains(&f.name.as_str()) {
                        self.error(f.pos, format!("`{}` is built in and cannot be defined", f.name));
                    }
                    let sig = Signature {
                        return_type: f.return_type,
                        arity: Some(f.params.len()),
                        defined: true,
                    };
                    match self.signatures.insert(&f.name, sig) {
                        Some(old) if old.defined => self.error(f.pos, format!("function `{}` defined twice", f.name)),
                        Some(old) => self.compatible(f.pos, &f.name, old, sig),
                        None => {}
                    }
                }
                Item::Prototype(p) => {
                    self.ghost(p.pos, &p.name);
                    let arity = match &p.params {
                        PrototypeParams::Unspecified => None,
                        PrototypeParams::Void => Some(0),
                        PrototypeParams::List(l) => Some(l.len()),
                    };
                    let sig = Signature {
                        return_type: p.return_type,
                        arity,
                        defined: false,
                    };
                    match self.signatures.get(p.name.as_str()).copied() {
                        Some(old) => self.compatible(p.pos, &p.name, old, sig),
                        None => {
                            self.signatures.insert(&p.name, sig);
                        }
                    }
                }
            }
        }
        for name in self.signatures.keys() {
            if self.globals.contains(name) {
                self.diags.push(
                    Diagnostic::error("PROGRAM", format!("`{name}` names both a global and a function")).at(
                        self.file.clone(),
                        1,
                        1,
                    ),
                );
            }
        }
    }

    fn compatible(&mut self, pos: Pos, name: &str, a: Signature, b: Signature) {
        let arity_clash = matches!((a.arity, b.arity), (Some(x), Some(y)) if x != y);
        if a.return_type != b.return_type || arity_clash {
            self.error(pos, format!("conflicting declarations of `{name}`"));
        }
    }

    fn function(&mut self, f: &'p Function) {
        let mut scopes: Vec<Vec<&str>> = vec![Vec::new()];
        for p in &f.params {
            self.ghost(f.pos, p);
            if scopes[0].contains(&p.as_str()) {
                self.error(f.pos, format!("parameter `{p}` declared twice"));
            }
            scopes[0].push(p);
        }
        // The body shares the parameters' scope in C.
        for s in &f.body {
            self.stmt(f, s, &mut scopes);
        }
    }

    fn visible(&self, scopes: &[Vec<&str>], name: &str) -> bool {
        self.globals.contains(name) || scopes.iter().any(|s| s.contains(&name))
    }

    fn expr(&mut self, pos: Pos, e: &crate::expr::Expr, scopes: &[Vec<&str>]) {
        for u in free_variables(e) {
            match u {
                VarUse::Current(name) => {
                    self.ghost(pos, &name);
                    if !self.visible(scopes, &name) {
                        self.error(pos, format!("use of undeclared variable `{name}`"));
                    }
                }
                _ => self.error(pos, "ACSL constructs are not allowed in program code"),
            }
        }
    }

    fn call(&mut self, pos: Pos, call: &Call, scopes: &[Vec<&str>], as_value: bool) {
        for a in &call.args {
            self.expr(pos, a, scopes);
        }
        if call.is_nondet() {
            if !call.args.is_empty() {
                self.error(pos, format!("`{NONDET_INT}` takes no arguments"));
            }
            return;
        }
        if BUILTIN_FUNCTIONS.contains(&call.callee.as_str()) {
            self.error(pos, format!("`{}` cannot be used here", call.callee));
            return;
        }
        let Some(sig) = self.signatures.get(call.callee.as_str()).copied() else {
            self.error(pos, format!("call to undeclared function `{}`", call.callee));
            return;
        };
        if !sig.defined {
            self.error(pos, format!("function `{}` has no definition", call.callee));
        }
        if let Some(n) = sig.arity {
            if n != call.args.len() {
                self.error(
                    pos,
                    format!("`{}` expects {n} argument(s), got {}", call.callee, call.args.len()),
                );
            }
        }
        if as_value && sig.return_type == ReturnType::Void {
            self.error(pos, format!("value of void function `{}` used", call.callee));
        }
    }

    fn rhs(&mut self, pos: Pos, rhs: &Rhs, scopes: &[Vec<&str>]) {
        match rhs {
            Rhs::Expr(e) => self.expr(pos, e, scopes),
            Rhs::Call(c) => self.call(pos, c, scopes, true),
        }
    }

    fn nested(&mut self, f: &'p Function, s: &'p Stmt, scopes: &mut Vec<Vec<&'p str>>) {
        scopes.push(Vec::new());
        self.stmt(f, s, scopes);
        scopes.pop();
    }

    fn stmt(&mut self, f: &'p Function, s: &'p Stmt, scopes: &mut Vec<Vec<&'p str>>) {
        let pos = s.pos;
        match &s.kind {
            StmtKind::Decl(vars) => {
                for v in vars {
                    self.ghost(pos, &v.name);
                    if let Some(init) = &v.init {
                        self.rhs(pos, init, scopes);
                    }
                    let top = scopes.last_mut().expect("scope");
                    if top.contains(&v.name.as_str()) {
                        self.error(pos, format!("`{}` redeclared in the same scope", v.name));
                    }
                    top.push(&v.name);
                }
            }
            StmtKind::Assign { target, value } => {
                self.rhs(pos, value, scopes);
                self.ghost(pos, target);
                if !self.visible(scopes, target) {
                    self.error(pos, format!("assignment to undeclared variable `{target}`"));
                }
            }
            StmtKind::Call(c) => self.call(pos, c, scopes, false),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.expr(pos, cond, scopes);
                self.nested(f, then_branch, scopes);
                if let Some(e) = else_branch {
                    self.nested(f, e, scopes);
                }
            }
            StmtKind::While { cond, body } => {
                self.expr(pos, cond, scopes);
                self.nested(f, body, scopes);
            }
            StmtKind::Block { stmts, .. } => {
                scopes.push(Vec::new());
                for child in stmts {
                    self.stmt(f, child, scopes);
                }
                scopes.pop();
            }
            StmtKind::Return(value) => match (f.return_type, value) {
                (ReturnType::Int, Some(v)) => self.rhs(pos, v, scopes),
                (ReturnType::Int, None) => self.error(pos, format!("`return;` in int function `{}`", f.name)),
                (ReturnType::Void, Some(_)) => {
                    self.error(pos, format!("`return` with a value in void function `{}`", f.name))
                }
                (ReturnType::Void, None) => {}
            },
            StmtKind::Assert(e) => self.expr(pos, e, scopes),
            StmtKind::ReachError | StmtKind::Abort | StmtKind::Empty => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csrc::parse_program;

    fn codes(src: &str) -> Vec<(&'static str, String)> {
        check_program(&parse_program(src).unwrap())
            .into_iter()
            .map(|d| (d.code, d.message))
            .collect()
    }

    #[test]
    fn well_formed_program_is_clean() {
        let src = "extern int __VERIFIER_nondet_int(void);
int g = 3;
int f(int x);
int f(int x) { int y = x + g; { int y = 2; g = y; } return y; }
void h() { g = 0; return; }
int main() { int a = __VERIFIER_nondet_int(); h(); a = f(a); for (int i = 0; i < 2; i++) { assert(i < 2); } return 0; }";
        assert_eq!(codes(src), []);
    }

    #[test]
    fn missing_main() {
        let c = codes("int f() { return 0; }");
        assert_eq!(c.len(), 1);
        assert!(c[0].1.contains("main"));
    }

    #[test]
    fn name_resolution_errors() {
        let c = codes("int main() { x = 1; int y = z; return w; }");
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|(code, _)| *code == "PROGRAM"));
        let c = codes("int main() { int x = 1; int x = 2; return 0; }");
        assert_eq!(c.len(), 1);
        // the for initializer is scoped to the loop
        let c = codes("int main() { for (int i = 0; i < 1; i++) { } return i; }");
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn call_errors() {
        let c = codes("void v() { } int f(int a) { return a; } int main() { int x = v(); f(); g(); return 0; }");
        let msgs: Vec<_> = c.iter().map(|(_, m)| m.as_str()).collect();
        assert_eq!(msgs.len(), 3, "{msgs:?}");
        assert!(msgs[0].contains("void"));
        assert!(msgs[1].contains("expects 1"));
        assert!(msgs[2].contains("undeclared function"));
        let c = codes("extern int ext(int); int main() { int x = ext(1); return x; }");
        assert!(c[0].1.contains("no definition"));
    }

    #[test]
    fn return_forms() {
        let c = codes("void f() { return 1; } int g() { return; } int main() { return 0; }");
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn ghost_prefix_reserved() {
        let c = codes("int __wit_pre_x; int main() { int __wit_result = 0; return __wit_result; }");
        assert_eq!(c.iter().filter(|(code, _)| *code == "GHOST").count(), 3);
    }

    #[test]
    fn recursion_allowed() {
        assert_eq!(
            codes("int f(int n) { if (n <= 0) return 0; int r = f(n - 1); return r + 1; } int main() { return 0; }"),
            []
        );
    }
}
