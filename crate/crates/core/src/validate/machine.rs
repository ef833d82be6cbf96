//! Slot-resolved form of a program with its witness checks attached, and the
//! interpreter that runs it.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Failure, Limits, Outcome, RunReport, TraceEvent};
use crate::csrc::{Function, Pos, Program, ProgramPoint, ReturnType, Rhs, Stmt, StmtId, StmtKind};
use crate::expr::{apply_binary, apply_unary, BinaryOp, Expr, ExprContext, UnaryOp};
use crate::lint::ResolvedEntry;

const TRACE_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy)]
enum Slot {
    Local(u32),
    Global(u32),
}

#[derive(Debug, Clone)]
enum CExpr {
    Int(i32),
    Read(Slot),
    /// Index into the activation's pre-state snapshot.
    Pre(u32),
    Result,
    Unary(UnaryOp, Box<CExpr>),
    Binary(BinaryOp, Box<CExpr>, Box<CExpr>),
    Cond(Box<CExpr>, Box<CExpr>, Box<CExpr>),
    Unbound(String),
}

#[derive(Debug, Clone)]
enum Callee {
    Nondet,
    User(usize),
    Missing(String),
}

#[derive(Debug, Clone)]
enum CRhs {
    Expr(CExpr),
    Call(Callee, Vec<CExpr>),
}

#[derive(Debug, Clone)]
struct Check {
    entry: usize,
    clause: ExprContext,
    expr: CExpr,
}

#[derive(Debug, Clone)]
struct CStmt {
    id: StmtId,
    pos: Pos,
    /// Location invariants checked before the statement runs.
    checks: Vec<Check>,
    kind: CKind,
}

#[derive(Debug, Clone)]
enum CKind {
    Decl(Vec<(u32, Option<CRhs>)>),
    Assign(Slot, CRhs),
    Call(Callee, Vec<CExpr>),
    If(CExpr, Box<CStmt>, Option<Box<CStmt>>),
    While {
        cond: CExpr,
        body: Box<CStmt>,
        checks: Vec<Check>,
    },
    Block(Vec<CStmt>),
    Return(Option<CRhs>),
    Assert(CExpr),
    ReachError,
    Abort,
    Empty,
}

#[derive(Debug, Clone)]
struct CFunction {
    name: String,
    nparams: usize,
    slot_names: Vec<String>,
    is_void: bool,
    is_main: bool,
    needs_pre: bool,
    body: Vec<CStmt>,
    requires: Vec<Check>,
    ensures: Vec<Check>,
}

/// A program compiled together with the checks of a set of resolved entries.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    global_names: Vec<String>,
    global_inits: Vec<Option<CExpr>>,
    functions: Vec<CFunction>,
    main: Option<usize>,
}

#[derive(Default)]
struct Grouped<'e> {
    requires: HashMap<&'e str, Vec<(usize, &'e Expr)>>,
    ensures: HashMap<&'e str, Vec<(usize, &'e Expr)>>,
    loops: HashMap<StmtId, Vec<(usize, &'e Expr)>>,
    locations: HashMap<StmtId, Vec<(usize, &'e Expr)>>,
}

struct Ctx<'p> {
    globals: HashMap<&'p str, u32>,
    functions: HashMap<&'p str, usize>,
}

impl Ctx<'_> {
    fn callee(&self, name: &str) -> Callee {
        if name == crate::csrc::NONDET_INT {
            return Callee::Nondet;
        }
        match self.functions.get(name) {
            Some(&i) => Callee::User(i),
            None => Callee::Missing(name.to_owned()),
        }
    }
}

pub(crate) fn compile(p: &Program, entries: &[&ResolvedEntry]) -> Compiled {
    let mut grouped = Grouped::default();
    for e in entries {
        for c in &e.clauses {
            if c.expr.is_true_literal() {
                continue;
            }
            let item = (e.index, &c.expr);
            match (&e.point, c.context) {
                (ProgramPoint::FunctionEntry { function }, ExprContext::Requires) => {
                    grouped.requires.entry(function.as_str()).or_default().push(item)
                }
                (ProgramPoint::FunctionEntry { function }, ExprContext::Ensures) => {
                    grouped.ensures.entry(function.as_str()).or_default().push(item)
                }
                (ProgramPoint::LoopHead { stmt, .. }, _) => grouped.loops.entry(*stmt).or_default().push(item),
                (ProgramPoint::BeforeStatement { stmt, .. }, _) => {
                    grouped.locations.entry(*stmt).or_default().push(item)
                }
                _ => {}
            }
        }
    }
    let global_decls: Vec<_> = p.globals().collect();
    let ctx = Ctx {
        globals: global_decls
            .iter()
            .enumerate()
            .map(|(i, d)| (d.name.as_str(), i as u32))
            .collect(),
        functions: p.functions().enumerate().map(|(i, f)| (f.name.as_str(), i)).collect(),
    };
    let global_inits = global_decls
        .iter()
        .map(|d| match &d.init {
            Some(Rhs::Expr(e)) => Some(FnCx::constant(e)),
            Some(Rhs::Call(c)) => Some(CExpr::Unbound(format!("{}()", c.callee))),
            None => None,
        })
        .collect();
    let functions = p.functions().map(|f| FnCx::new(&ctx, &grouped, f).compile()).collect();
    Compiled {
        global_names: global_decls.iter().map(|d| d.name.clone()).collect(),
        global_inits,
        functions,
        main: ctx.functions.get("main").copied(),
    }
}

struct FnCx<'a> {
    ctx: &'a Ctx<'a>,
    grouped: &'a Grouped<'a>,
    f: &'a Function,
    nglobals: u32,
    scope: Vec<(&'a str, u32)>,
    slot_names: Vec<String>,
    needs_pre: bool,
}

impl<'a> FnCx<'a> {
    fn new(ctx: &'a Ctx<'a>, grouped: &'a Grouped<'a>, f: &'a Function) -> Self {
        let mut cx = FnCx {
            ctx,
            grouped,
            f,
            nglobals: ctx.globals.len() as u32,
            scope: Vec::new(),
            slot_names: Vec::new(),
            needs_pre: false,
        };
        for p in &f.params {
            cx.declare(p);
        }
        cx
    }

    fn constant(e: &Expr) -> CExpr {
        match e {
            Expr::Int(v) => CExpr::Int(*v as i32),
            Expr::Unary(op, a) => CExpr::Unary(*op, Box::new(Self::constant(a))),
            Expr::Binary(op, a, b) => CExpr::Binary(*op, Box::new(Self::constant(a)), Box::new(Self::constant(b))),
            Expr::Cond(a, b, c) => CExpr::Cond(
                Box::new(Self::constant(a)),
                Box::new(Self::constant(b)),
                Box::new(Self::constant(c)),
            ),
            other => CExpr::Unbound(other.to_string()),
        }
    }

    fn declare(&mut self, name: &'a str) -> u32 {
        let slot = self.slot_names.len() as u32;
        self.slot_names.push(name.to_owned());
        self.scope.push((name, slot));
        slot
    }

    fn lookup(&self, name: &str) -> Option<Slot> {
        if let Some((_, slot)) = self.scope.iter().rev().find(|(n, _)| *n == name) {
            return Some(Slot::Local(*slot));
        }
        self.ctx.globals.get(name).map(|&g| Slot::Global(g))
    }

    fn param_index(&self, name: &str) -> Option<u32> {
        self.f.params.iter().position(|p| p == name).map(|i| i as u32)
    }

    fn pre_index(&mut self, name: &str) -> CExpr {
        self.needs_pre = true;
        if let Some(i) = self.param_index(name) {
            return CExpr::Pre(self.nglobals + i);
        }
        match self.ctx.globals.get(name) {
            Some(&g) => CExpr::Pre(g),
            None => CExpr::Unbound(format!("\\old({name})")),
        }
    }

    fn expr(&mut self, e: &Expr, context: Option<ExprContext>) -> CExpr {
        match e {
            Expr::Int(v) => CExpr::Int(*v as i32),
            Expr::Var(x) => {
                if context == Some(ExprContext::Ensures) {
                    if self.param_index(x).is_some() {
                        return self.pre_index(x);
                    }
                    return match self.ctx.globals.get(x.as_str()) {
                        Some(&g) => CExpr::Read(Slot::Global(g)),
                        None => CExpr::Unbound(x.clone()),
                    };
                }
                match self.lookup(x) {
                    Some(slot) => CExpr::Read(slot),
                    None => CExpr::Unbound(x.clone()),
                }
            }
            Expr::Unary(op, a) => CExpr::Unary(*op, Box::new(self.expr(a, context))),
            Expr::Binary(op, a, b) => {
                CExpr::Binary(*op, Box::new(self.expr(a, context)), Box::new(self.expr(b, context)))
            }
            Expr::Cond(a, b, c) => CExpr::Cond(
                Box::new(self.expr(a, context)),
                Box::new(self.expr(b, context)),
                Box::new(self.expr(c, context)),
            ),
            Expr::Old(x) | Expr::AtPre(x) if context.is_some() => self.pre_index(x),
            Expr::Result if context == Some(ExprContext::Ensures) => CExpr::Result,
            other => CExpr::Unbound(other.to_string()),
        }
    }

    fn checks(&mut self, items: Option<&Vec<(usize, &Expr)>>, clause: ExprContext) -> Vec<Check> {
        items
            .into_iter()
            .flatten()
            .map(|&(entry, e)| Check {
                entry,
                clause,
                expr: self.expr(e, Some(clause)),
            })
            .collect()
    }

    fn rhs(&mut self, r: &Rhs) -> CRhs {
        match r {
            Rhs::Expr(e) => CRhs::Expr(self.expr(e, None)),
            Rhs::Call(c) => CRhs::Call(
                self.ctx.callee(&c.callee),
                c.args.iter().map(|a| self.expr(a, None)).collect(),
            ),
        }
    }

    fn compile(mut self) -> CFunction {
        let name = self.f.name.as_str();
        let requires = self.checks(self.grouped.requires.get(name), ExprContext::Requires);
        let ensures = self.checks(self.grouped.ensures.get(name), ExprContext::Ensures);
        let body = self.f.body.iter().map(|s| self.stmt(s)).collect();
        CFunction {
            name: self.f.name.clone(),
            nparams: self.f.params.len(),
            slot_names: self.slot_names,
            is_void: self.f.return_type == ReturnType::Void,
            is_main: self.f.name == "main",
            needs_pre: self.needs_pre,
            body,
            requires,
            ensures,
        }
    }

    fn nested(&mut self, s: &'a Stmt) -> Box<CStmt> {
        let mark = self.scope.len();
        let out = self.stmt(s);
        self.scope.truncate(mark);
        Box::new(out)
    }

    fn stmt(&mut self, s: &'a Stmt) -> CStmt {
        let checks = self.checks(self.grouped.locations.get(&s.id), ExprContext::Invariant);
        let kind = match &s.kind {
            StmtKind::Decl(vars) => {
                let mut out = Vec::new();
                for v in vars {
                    let init = v.init.as_ref().map(|r| self.rhs(r));
                    out.push((self.declare(&v.name), init));
                }
                CKind::Decl(out)
            }
            StmtKind::Assign { target, value } => {
                let value = self.rhs(value);
                match self.lookup(target) {
                    Some(slot) => CKind::Assign(slot, value),
                    None => CKind::Assert(CExpr::Unbound(target.clone())),
                }
            }
            StmtKind::Call(c) => CKind::Call(
                self.ctx.callee(&c.callee),
                c.args.iter().map(|a| self.expr(a, None)).collect(),
            ),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let cond = self.expr(cond, None);
                let then_branch = self.nested(then_branch);
                let else_branch = else_branch.as_ref().map(|e| self.nested(e));
                CKind::If(cond, then_branch, else_branch)
            }
            StmtKind::While { cond, body } => {
                let checks = self.checks(self.grouped.loops.get(&s.id), ExprContext::Invariant);
                CKind::While {
                    cond: self.expr(cond, None),
                    body: self.nested(body),
                    checks,
                }
            }
            StmtKind::Block { stmts, .. } => {
                let mark = self.scope.len();
                let out = stmts.iter().map(|c| self.stmt(c)).collect();
                self.scope.truncate(mark);
                CKind::Block(out)
            }
            StmtKind::Return(v) => CKind::Return(v.as_ref().map(|r| self.rhs(r))),
            StmtKind::Assert(e) => CKind::Assert(self.expr(e, None)),
            StmtKind::ReachError => CKind::ReachError,
            StmtKind::Abort => CKind::Abort,
            StmtKind::Empty => CKind::Empty,
        };
        CStmt {
            id: s.id,
            pos: s.pos,
            checks,
            kind,
        }
    }
}

/// Supplies the values of successive `__VERIFIER_nondet_int()` calls.
pub(crate) trait InputSource {
    fn next(&mut self, consumed: &[i32]) -> i32;
}

/// Replays `values`, then yields `lo` up to `max_calls` values in total, then
/// pseudo-random values in `[lo, hi]` seeded by the first `max_calls` values.
pub(crate) struct Forced<'v> {
    pub values: &'v [i32],
    pub lo: i32,
    pub hi: i32,
    pub max_calls: usize,
    tail: Option<ChaCha8Rng>,
}

impl<'v> Forced<'v> {
    pub fn new(values: &'v [i32], lo: i32, hi: i32, max_calls: usize) -> Self {
        Forced {
            values,
            lo,
            hi,
            max_calls,
            tail: None,
        }
    }

    /// Exactly `values`; any further call reads 0.
    pub fn replay(values: &'v [i32]) -> Self {
        Forced::new(values, 0, 0, usize::MAX)
    }
}

fn fnv1a(values: &[i32]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

impl InputSource for Forced<'_> {
    fn next(&mut self, consumed: &[i32]) -> i32 {
        let i = consumed.len();
        if i < self.values.len() {
            return self.values[i];
        }
        if i < self.max_calls {
            return self.lo;
        }
        let (lo, hi, max) = (self.lo, self.hi, self.max_calls);
        self.tail
            .get_or_insert_with(|| ChaCha8Rng::seed_from_u64(fnv1a(&consumed[..max])))
            .gen_range(lo..=hi)
    }
}

pub(crate) struct Sampled {
    rng: ChaCha8Rng,
    lo: i32,
    hi: i32,
}

impl Sampled {
    pub fn new(seed: u64, sample: u64, lo: i32, hi: i32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(sample);
        Sampled { rng, lo, hi }
    }
}

impl InputSource for Sampled {
    fn next(&mut self, _: &[i32]) -> i32 {
        self.rng.gen_range(self.lo..=self.hi)
    }
}

enum Stop {
    Violated(Failure),
    Fault(String),
    Abort,
    StepLimit,
    DepthLimit,
}

enum Flow {
    Normal,
    Return(Option<i32>, Pos),
}

struct Frame {
    func: usize,
    locals: Vec<Option<i32>>,
    pre: Vec<i32>,
}

struct Machine<'c, I> {
    code: &'c Compiled,
    inputs: I,
    limits: Limits,
    consumed: Vec<i32>,
    globals: Vec<i32>,
    steps: u64,
    evaluated: u64,
    depth: usize,
    trace: Option<Vec<TraceEvent>>,
}

pub(crate) fn execute<I: InputSource>(code: &Compiled, inputs: I, limits: Limits, trace: bool) -> RunReport {
    let mut m = Machine {
        code,
        inputs,
        limits,
        consumed: Vec::new(),
        globals: vec![0; code.global_names.len()],
        steps: 0,
        evaluated: 0,
        depth: 0,
        trace: trace.then(Vec::new),
    };
    let outcome = match m.run_main() {
        Ok(code) => {
            m.event(|| "main".into(), || format!("exit {code}"));
            Outcome::Terminated { exit_code: code }
        }
        Err(Stop::Abort) => Outcome::Aborted,
        Err(Stop::Violated(f)) => Outcome::Violated(f),
        Err(Stop::Fault(reason)) => Outcome::Unknown(reason),
        Err(Stop::StepLimit) => Outcome::Unknown(format!("step limit of {} exceeded", limits.step_limit)),
        Err(Stop::DepthLimit) => Outcome::Unknown(format!("call depth limit of {} exceeded", limits.call_depth)),
    };
    RunReport {
        outcome,
        inputs: m.consumed,
        steps: m.steps,
        entries_evaluated: m.evaluated,
        trace: m.trace.unwrap_or_default(),
    }
}

impl<I: InputSource> Machine<'_, I> {
    fn event(&mut self, point: impl FnOnce() -> String, event: impl FnOnce() -> String) {
        if let Some(t) = &mut self.trace {
            if t.len() < TRACE_CAP {
                t.push(TraceEvent {
                    point: point(),
                    event: event(),
                });
            }
        }
    }

    fn tick(&mut self) -> Result<(), Stop> {
        self.steps += 1;
        if self.steps > self.limits.step_limit {
            Err(Stop::StepLimit)
        } else {
            Ok(())
        }
    }

    fn run_main(&mut self) -> Result<i32, Stop> {
        let code = self.code;
        for (i, init) in code.global_inits.iter().enumerate() {
            if let Some(e) = init {
                let frame = Frame {
                    func: usize::MAX,
                    locals: Vec::new(),
                    pre: Vec::new(),
                };
                self.globals[i] = self.eval(e, &frame, None)?;
            }
        }
        let Some(main) = code.main else {
            return Err(Stop::Fault("program has no `main` function".into()));
        };
        Ok(self.call(main, Vec::new())?.unwrap_or(0))
    }

    fn fault_name(&self, frame: &Frame, slot: Slot) -> String {
        match slot {
            Slot::Local(i) => self.code.functions[frame.func].slot_names[i as usize].clone(),
            Slot::Global(i) => self.code.global_names[i as usize].clone(),
        }
    }

    fn eval(&mut self, e: &CExpr, frame: &Frame, result: Option<i32>) -> Result<i32, Stop> {
        Ok(match e {
            CExpr::Int(v) => *v,
            CExpr::Read(Slot::Global(g)) => self.globals[*g as usize],
            CExpr::Read(slot @ Slot::Local(l)) => match frame.locals[*l as usize] {
                Some(v) => v,
                None => {
                    return Err(Stop::Fault(format!(
                        "read of uninitialized variable `{}`",
                        self.fault_name(frame, *slot)
                    )))
                }
            },
            CExpr::Pre(i) => frame.pre[*i as usize],
            CExpr::Result => match result {
                Some(v) => v,
                None => return Err(Stop::Fault("\\result is not available".into())),
            },
            CExpr::Unary(op, a) => apply_unary(*op, self.eval(a, frame, result)?),
            CExpr::Binary(BinaryOp::And, a, b) => {
                i32::from(self.eval(a, frame, result)? != 0 && self.eval(b, frame, result)? != 0)
            }
            CExpr::Binary(BinaryOp::Or, a, b) => {
                i32::from(self.eval(a, frame, result)? != 0 || self.eval(b, frame, result)? != 0)
            }
            CExpr::Binary(op, a, b) => {
                let x = self.eval(a, frame, result)?;
                let y = self.eval(b, frame, result)?;
                apply_binary(*op, x, y).map_err(|f| Stop::Fault(f.to_string()))?
            }
            CExpr::Cond(c, t, f) => {
                if self.eval(c, frame, result)? != 0 {
                    self.eval(t, frame, result)?
                } else {
                    self.eval(f, frame, result)?
                }
            }
            CExpr::Unbound(name) => return Err(Stop::Fault(format!("`{name}` is not bound"))),
        })
    }

    fn check_all(
        &mut self,
        checks: &[Check],
        frame: &Frame,
        result: Option<i32>,
        point: &dyn Fn() -> String,
    ) -> Result<(), Stop> {
        for c in checks {
            self.evaluated += 1;
            match self.eval(&c.expr, frame, result) {
                Ok(0) => {
                    self.event(point, || format!("entry {} {} fails", c.entry, c.clause));
                    return Err(Stop::Violated(Failure::Entry {
                        index: c.entry,
                        clause: c.clause,
                    }));
                }
                Ok(_) => self.event(point, || format!("entry {} {} holds", c.entry, c.clause)),
                Err(Stop::Fault(msg)) => return Err(Stop::Fault(format!("entry {} ({}): {msg}", c.entry, c.clause))),
                Err(other) => return Err(other),
            }
        }
        Ok(())
    }

    fn nondet(&mut self) -> i32 {
        let v = self.inputs.next(&self.consumed);
        self.consumed.push(v);
        v
    }

    fn invoke(&mut self, callee: &Callee, args: &[CExpr], frame: &Frame, at: Pos) -> Result<Option<i32>, Stop> {
        let code = self.code;
        match callee {
            Callee::Nondet => {
                let v = self.nondet();
                let fname = &code.functions[frame.func].name;
                self.event(|| format!("{fname}@{at}"), || format!("input {v}"));
                Ok(Some(v))
            }
            Callee::User(fi) => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.eval(a, frame, None)?);
                }
                self.call(*fi, values)
            }
            Callee::Missing(name) => Err(Stop::Fault(format!("call to `{name}` without a definition"))),
        }
    }

    fn rhs(&mut self, r: &CRhs, frame: &Frame, at: Pos) -> Result<i32, Stop> {
        match r {
            CRhs::Expr(e) => self.eval(e, frame, None),
            CRhs::Call(callee, args) => self
                .invoke(callee, args, frame, at)?
                .ok_or_else(|| Stop::Fault("value of a void call used".into())),
        }
    }

    fn call(&mut self, fi: usize, args: Vec<i32>) -> Result<Option<i32>, Stop> {
        let code = self.code;
        let f = &code.functions[fi];
        if self.depth >= self.limits.call_depth {
            return Err(Stop::DepthLimit);
        }
        self.depth += 1;
        let mut locals = vec![None; f.slot_names.len()];
        for (slot, v) in locals.iter_mut().zip(&args) {
            *slot = Some(*v);
        }
        debug_assert_eq!(args.len(), f.nparams);
        let pre = if f.needs_pre {
            let mut pre = self.globals.clone();
            pre.extend(&args);
            pre
        } else {
            Vec::new()
        };
        let mut frame = Frame { func: fi, locals, pre };
        self.event(
            || format!("entry({})", f.name),
            || format!("call {}({})", f.name, join(&args)),
        );
        self.check_all(&f.requires, &frame, None, &|| format!("entry({})", f.name))?;
        let mut exit = None;
        for s in &f.body {
            if let Flow::Return(v, pos) = self.exec(s, &mut frame)? {
                exit = Some((v, pos));
                break;
            }
        }
        let (value, point) = match exit {
            Some((v, pos)) => (v, format!("return({}@{pos})", f.name)),
            None if f.is_void => (None, format!("return({}@end)", f.name)),
            None if f.is_main => (Some(0), format!("return({}@end)", f.name)),
            None => {
                return Err(Stop::Fault(format!(
                    "control reaches the end of non-void function `{}`",
                    f.name
                )))
            }
        };
        self.check_all(&f.ensures, &frame, value, &|| point.clone())?;
        self.event(
            || point.clone(),
            || match value {
                Some(v) => format!("return {v}"),
                None => "return".into(),
            },
        );
        self.depth -= 1;
        Ok(value)
    }

    fn exec(&mut self, s: &CStmt, frame: &mut Frame) -> Result<Flow, Stop> {
        self.tick()?;
        let code = self.code;
        let fname = &code.functions[frame.func].name;
        if !s.checks.is_empty() {
            self.check_all(&s.checks, frame, None, &|| format!("before({fname}@{})", s.pos))?;
        }
        match &s.kind {
            CKind::Decl(vars) => {
                for (slot, init) in vars {
                    let v = match init {
                        Some(r) => Some(self.rhs(r, frame, s.pos)?),
                        None => None,
                    };
                    frame.locals[*slot as usize] = v;
                }
            }
            CKind::Assign(slot, r) => {
                let v = self.rhs(r, frame, s.pos)?;
                match slot {
                    Slot::Local(l) => frame.locals[*l as usize] = Some(v),
                    Slot::Global(g) => self.globals[*g as usize] = v,
                }
            }
            CKind::Call(callee, args) => {
                self.invoke(callee, args, frame, s.pos)?;
            }
            CKind::If(cond, then_branch, else_branch) => {
                if self.eval(cond, frame, None)? != 0 {
                    return self.exec(then_branch, frame);
                } else if let Some(e) = else_branch {
                    return self.exec(e, frame);
                }
            }
            CKind::While { cond, body, checks } => loop {
                if !checks.is_empty() {
                    self.check_all(checks, frame, None, &|| format!("loop({fname}@{})", s.pos))?;
                }
                self.tick()?;
                if self.eval(cond, frame, None)? == 0 {
                    break;
                }
                if let flow @ Flow::Return(..) = self.exec(body, frame)? {
                    return Ok(flow);
                }
            },
            CKind::Block(stmts) => {
                for c in stmts {
                    if let flow @ Flow::Return(..) = self.exec(c, frame)? {
                        return Ok(flow);
                    }
                }
            }
            CKind::Return(r) => {
                let v = match r {
                    Some(r) => Some(self.rhs(r, frame, s.pos)?),
                    None => None,
                };
                return Ok(Flow::Return(v, s.pos));
            }
            CKind::Assert(e) => {
                if self.eval(e, frame, None)? == 0 {
                    self.event(|| format!("{fname}@{}", s.pos), || "assert fails".into());
                    return Err(Stop::Violated(Failure::Assert { stmt: s.id, pos: s.pos }));
                }
            }
            CKind::ReachError => {
                self.event(|| format!("{fname}@{}", s.pos), || "reach_error() called".into());
                return Err(Stop::Violated(Failure::ReachError { stmt: s.id, pos: s.pos }));
            }
            CKind::Abort => {
                self.event(|| format!("{fname}@{}", s.pos), || "abort() called".into());
                return Err(Stop::Abort);
            }
            CKind::Empty => {}
        }
        Ok(Flow::Normal)
    }
}

fn join(values: &[i32]) -> String {
    values.iter().map(i32::to_string).collect::<Vec<_>>().join(", ")
}
