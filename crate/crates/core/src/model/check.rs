//! Name resolution, type checking and static-bounds validation.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use super::ast::*;
use super::diag::Diagnostic;
use super::types::{EnumDef, RecordDef, Ty, Value};
use super::{
    Access, CondTree, Expr, ExprKind, Guard, Model, OutputVar, Place, State, StateId, Stmt,
    Transition, Variable,
};

type FieldDecl = (String, TypeExpr, Pos);

pub(crate) fn resolve(decl: &ModelDecl) -> (Option<Model>, Vec<Diagnostic>) {
    let mut r = Resolver::new(decl);
    let model = r.run();
    let mut diags = r.diags;
    diags.sort();
    diags.dedup();
    (model, diags)
}

struct LoopScope {
    name: String,
    slot: usize,
    lo: i64,
    hi: i64,
}

#[derive(Default)]
struct Scope {
    loops: Vec<LoopScope>,
}

struct Resolver<'a> {
    decl: &'a ModelDecl,
    diags: Vec<Diagnostic>,
    consts: HashMap<String, i64>,
    enums: Vec<Arc<EnumDef>>,
    enum_by_name: HashMap<String, usize>,
    variants: HashMap<String, (usize, usize)>,
    record_decls: HashMap<String, (&'a [FieldDecl], Pos)>,
    records: HashMap<String, Arc<RecordDef>>,
    record_order: Vec<Arc<RecordDef>>,
    visiting: Vec<String>,
    inputs: Vec<Variable>,
    outputs: Vec<OutputVar>,
}

fn is_keyword(name: &str) -> bool {
    matches!(
        name,
        "model"
            | "const"
            | "enum"
            | "type"
            | "input"
            | "output"
            | "initial"
            | "state"
            | "transition"
            | "strong"
            | "weak"
            | "when"
            | "if"
            | "else"
            | "for"
            | "in"
            | "bool"
            | "int"
            | "true"
            | "false"
    )
}

fn compatible(a: &Ty, b: &Ty) -> bool {
    match (a, b) {
        (Ty::Bool, Ty::Bool) => true,
        (Ty::Int { .. }, Ty::Int { .. }) => true,
        (Ty::Enum(x), Ty::Enum(y)) => x.name == y.name,
        (Ty::Array(x, n), Ty::Array(y, m)) => n == m && compatible(x, y),
        (Ty::Record(x), Ty::Record(y)) => x.name == y.name,
        _ => false,
    }
}

fn interval(ty: &Ty) -> (i64, i64) {
    match ty {
        Ty::Int { lo, hi } => (*lo, *hi),
        _ => (0, 0),
    }
}

fn arith_interval(op: BinOp, a: (i64, i64), b: (i64, i64)) -> Option<(i64, i64)> {
    match op {
        BinOp::Add => Some((a.0.checked_add(b.0)?, a.1.checked_add(b.1)?)),
        BinOp::Sub => Some((a.0.checked_sub(b.1)?, a.1.checked_sub(b.0)?)),
        BinOp::Mul => {
            let products = [
                a.0.checked_mul(b.0)?,
                a.0.checked_mul(b.1)?,
                a.1.checked_mul(b.0)?,
                a.1.checked_mul(b.1)?,
            ];
            Some((*products.iter().min()?, *products.iter().max()?))
        }
        _ => None,
    }
}

/// Renders an expression back to source syntax.
pub(crate) fn show(e: &SExpr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn prec(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Eq | BinOp::Ne => 3,
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
        BinOp::Add | BinOp::Sub => 5,
        BinOp::Mul => 6,
    }
}

fn write_expr(out: &mut String, e: &SExpr, parent: u8) {
    match &e.kind {
        SExprKind::Int(v) => write!(out, "{v}").unwrap(),
        SExprKind::Bool(b) => write!(out, "{b}").unwrap(),
        SExprKind::Ident(n) => out.push_str(n),
        SExprKind::Field(b, f) => {
            write_expr(out, b, 9);
            write!(out, ".{f}").unwrap();
        }
        SExprKind::Index(b, i) => {
            write_expr(out, b, 9);
            out.push('[');
            write_expr(out, i, 0);
            out.push(']');
        }
        SExprKind::Unary(op, x) => {
            out.push(if *op == UnOp::Not { '!' } else { '-' });
            write_expr(out, x, 8);
        }
        SExprKind::Binary(op, a, b) => {
            let p = prec(*op);
            if p < parent {
                out.push('(');
            }
            write_expr(out, a, p);
            write!(out, " {} ", op.symbol()).unwrap();
            write_expr(out, b, p + 1);
            if p < parent {
                out.push(')');
            }
        }
        SExprKind::ArrayLit(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, x, 0);
            }
            out.push(']');
        }
        SExprKind::RecordLit(fields) => {
            out.push('{');
            for (i, (n, x)) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write!(out, "{n}: ").unwrap();
                write_expr(out, x, 0);
            }
            out.push('}');
        }
    }
}

impl<'a> Resolver<'a> {
    fn new(decl: &'a ModelDecl) -> Self {
        Resolver {
            decl,
            diags: Vec::new(),
            consts: HashMap::new(),
            enums: Vec::new(),
            enum_by_name: HashMap::new(),
            variants: HashMap::new(),
            record_decls: HashMap::new(),
            records: HashMap::new(),
            record_order: Vec::new(),
            visiting: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn err(&mut self, pos: Pos, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(pos, msg));
    }

    fn run(&mut self) -> Option<Model> {
        let decl = self.decl;
        let mut value_names: HashMap<String, Pos> = HashMap::new();
        let mut type_names: HashMap<String, Pos> = HashMap::new();
        let claim = |r: &mut Self, table: &mut HashMap<String, Pos>, name: &str, pos: Pos| {
            if is_keyword(name) {
                r.err(pos, format!("`{name}` is a reserved word"));
            } else if let Some(prev) = table.get(name) {
                r.err(
                    pos,
                    format!("duplicate name `{name}` (first declared at {prev})"),
                );
            } else {
                table.insert(name.to_string(), pos);
            }
        };

        // Constants first: they may size types.
        for item in &decl.items {
            if let Item::Const { name, value, pos } = item {
                claim(self, &mut value_names, name, *pos);
                match self.const_int(value) {
                    Ok(v) => {
                        self.consts.insert(name.clone(), v);
                    }
                    Err(m) => self.err(value.pos, m),
                }
            }
        }
        for item in &decl.items {
            match item {
                Item::Enum {
                    name,
                    variants,
                    pos,
                } => {
                    claim(self, &mut type_names, name, *pos);
                    if variants.is_empty() {
                        self.err(
                            *pos,
                            format!("enum `{name}` must have at least one variant"),
                        );
                    }
                    let idx = self.enums.len();
                    for (ordinal, (v, vpos)) in variants.iter().enumerate() {
                        claim(self, &mut value_names, v, *vpos);
                        self.variants.entry(v.clone()).or_insert((idx, ordinal));
                    }
                    self.enum_by_name.insert(name.clone(), idx);
                    self.enums.push(Arc::new(EnumDef {
                        name: name.clone(),
                        variants: variants.iter().map(|(v, _)| v.clone()).collect(),
                    }));
                }
                Item::Type { name, fields, pos } => {
                    claim(self, &mut type_names, name, *pos);
                    self.record_decls
                        .insert(name.clone(), (fields.as_slice(), *pos));
                }
                _ => {}
            }
        }
        let mut record_names: Vec<&String> = decl
            .items
            .iter()
            .filter_map(|i| match i {
                Item::Type { name, .. } => Some(name),
                _ => None,
            })
            .collect();
        record_names.dedup();
        for name in record_names {
            self.record(name, Pos::default());
        }

        for item in &decl.items {
            match item {
                Item::Input { name, ty, pos } => {
                    claim(self, &mut value_names, name, *pos);
                    if let Some(ty) = self.ty(ty) {
                        self.inputs.push(Variable {
                            name: name.clone(),
                            ty,
                        });
                    }
                }
                Item::Output {
                    name,
                    ty,
                    default,
                    pos,
                } => {
                    claim(self, &mut value_names, name, *pos);
                    if let Some(ty) = self.ty(ty) {
                        match self.literal(default, &ty) {
                            Ok(v) => self.outputs.push(OutputVar {
                                name: name.clone(),
                                ty,
                                default: v,
                            }),
                            Err(m) => self.err(default.pos, m),
                        }
                    }
                }
                _ => {}
            }
        }

        // States.
        let mut state_names: HashMap<String, Pos> = HashMap::new();
        let mut state_decls = Vec::new();
        let mut initials = Vec::new();
        for item in &decl.items {
            if let Item::State {
                name,
                initial,
                body,
                pos,
            } = item
            {
                claim(self, &mut state_names, name, *pos);
                if *initial {
                    initials.push((state_decls.len(), *pos));
                }
                state_decls.push((name.clone(), body, *pos));
            }
        }
        if state_decls.is_empty() {
            self.err(Pos { line: 1, col: 1 }, "model declares no states");
        }
        let initial = match initials.as_slice() {
            [(i, _)] => Some(*i),
            [] => {
                self.err(Pos { line: 1, col: 1 }, "model has no initial state");
                None
            }
            [_, rest @ ..] => {
                for (_, pos) in rest {
                    self.err(*pos, "more than one initial state");
                }
                None
            }
        };
        let state_index: HashMap<String, StateId> = state_decls
            .iter()
            .enumerate()
            .map(|(i, (n, _, _))| (n.clone(), i))
            .collect();

        let mut states = Vec::new();
        for (name, body, _) in &state_decls {
            let mut scope = Scope::default();
            let mut slots = 0;
            let body = self.stmts(body, &mut scope, &mut slots);
            states.push(State {
                name: name.clone(),
                body,
                outgoing: Vec::new(),
                loop_slots: slots,
            });
        }

        let mut transitions = Vec::new();
        for item in &decl.items {
            if let Item::Transition {
                source,
                target,
                kind,
                guard,
                ..
            } = item
            {
                let s = state_index.get(&source.0).copied();
                let t = state_index.get(&target.0).copied();
                if s.is_none() {
                    self.err(source.1, format!("unknown state `{}`", source.0));
                }
                if t.is_none() {
                    self.err(target.1, format!("unknown state `{}`", target.0));
                }
                let g = self.guard(guard);
                if let (Some(s), Some(t), Some(g)) = (s, t, g) {
                    let id = transitions.len();
                    states[s].outgoing.push(id);
                    transitions.push(Transition {
                        id,
                        source: s,
                        target: t,
                        kind: *kind,
                        guard: g,
                    });
                }
            }
        }

        if !self.diags.is_empty() {
            return None;
        }
        Some(Model {
            name: decl.name.clone(),
            enums: self.enums.clone(),
            records: self.record_order.clone(),
            inputs: std::mem::take(&mut self.inputs),
            outputs: std::mem::take(&mut self.outputs),
            states,
            initial: initial?,
            transitions,
        })
    }

    fn const_int(&self, e: &SExpr) -> Result<i64, String> {
        match &e.kind {
            SExprKind::Int(v) => Ok(*v),
            SExprKind::Ident(n) => self
                .consts
                .get(n)
                .copied()
                .ok_or_else(|| format!("`{n}` is not a constant")),
            SExprKind::Unary(UnOp::Neg, x) => self
                .const_int(x)?
                .checked_neg()
                .ok_or_else(|| "constant overflow".to_string()),
            SExprKind::Binary(op, a, b) if op.is_arithmetic() => {
                let (a, b) = (self.const_int(a)?, self.const_int(b)?);
                match op {
                    BinOp::Add => a.checked_add(b),
                    BinOp::Sub => a.checked_sub(b),
                    _ => a.checked_mul(b),
                }
                .ok_or_else(|| "constant overflow".to_string())
            }
            _ => Err(format!(
                "`{}` is not a constant integer expression",
                show(e)
            )),
        }
    }

    fn record(&mut self, name: &str, use_pos: Pos) -> Option<Ty> {
        if let Some(r) = self.records.get(name) {
            return Some(Ty::Record(r.clone()));
        }
        let (fields, pos) = *self.record_decls.get(name)?;
        if self.visiting.iter().any(|n| n == name) {
            let at = if use_pos == Pos::default() {
                pos
            } else {
                use_pos
            };
            self.err(at, format!("recursive type `{name}`"));
            return None;
        }
        self.visiting.push(name.to_string());
        let mut resolved = Vec::new();
        let mut seen = HashSet::new();
        let mut ok = true;
        for (fname, fty, fpos) in fields {
            if !seen.insert(fname.clone()) {
                self.err(*fpos, format!("duplicate field `{fname}` in type `{name}`"));
                ok = false;
            }
            match self.ty(fty) {
                Some(t) => resolved.push((fname.clone(), t)),
                None => ok = false,
            }
        }
        self.visiting.pop();
        if !ok {
            return None;
        }
        let def = Arc::new(RecordDef {
            name: name.to_string(),
            fields: resolved,
        });
        self.records.insert(name.to_string(), def.clone());
        self.record_order.push(def.clone());
        Some(Ty::Record(def))
    }

    fn ty(&mut self, t: &TypeExpr) -> Option<Ty> {
        match t {
            TypeExpr::Bool => Some(Ty::Bool),
            TypeExpr::Int(lo, hi) => {
                let l = self.const_int(lo).map_err(|m| self.err(lo.pos, m)).ok()?;
                let h = self.const_int(hi).map_err(|m| self.err(hi.pos, m)).ok()?;
                if l > h {
                    self.err(lo.pos, format!("empty integer range {l}..{h}"));
                    return None;
                }
                Some(Ty::Int { lo: l, hi: h })
            }
            TypeExpr::Named(name, pos) => {
                if let Some(&i) = self.enum_by_name.get(name) {
                    return Some(Ty::Enum(self.enums[i].clone()));
                }
                if self.record_decls.contains_key(name) {
                    return self.record(name, *pos);
                }
                self.err(*pos, format!("unknown type `{name}`"));
                None
            }
            TypeExpr::Array(elem, len) => {
                let elem = self.ty(elem);
                let n = match self.const_int(len) {
                    Ok(n) => n,
                    Err(_) => {
                        self.err(len.pos, "non-constant array length");
                        return None;
                    }
                };
                if n < 1 {
                    self.err(len.pos, "array length must be at least 1");
                    return None;
                }
                Some(Ty::Array(Box::new(elem?), n as usize))
            }
        }
    }

    fn literal(&self, e: &SExpr, ty: &Ty) -> Result<Value, String> {
        let mismatch = || format!("type mismatch: `{}` is not a literal of type {ty}", show(e));
        match (ty, &e.kind) {
            (Ty::Bool, SExprKind::Bool(b)) => Ok(Value::Bool(*b)),
            (Ty::Int { lo, hi }, _) => {
                let v = self.const_int(e).map_err(|_| mismatch())?;
                if v < *lo || v > *hi {
                    return Err(format!("value {v} outside range {lo}..{hi}"));
                }
                Ok(Value::Int(v))
            }
            (Ty::Enum(def), SExprKind::Ident(n)) => def
                .ordinal(n)
                .map(Value::Enum)
                .ok_or_else(|| format!("`{n}` is not a variant of enum `{}`", def.name)),
            (Ty::Array(elem, len), SExprKind::ArrayLit(items)) => {
                if items.len() != *len {
                    return Err(format!(
                        "array literal has {} elements, expected {len}",
                        items.len()
                    ));
                }
                items
                    .iter()
                    .map(|x| self.literal(x, elem))
                    .collect::<Result<_, _>>()
                    .map(Value::Array)
            }
            (Ty::Record(def), SExprKind::RecordLit(fields)) => {
                let mut out = Vec::new();
                for (fname, fty) in &def.fields {
                    let Some((_, x)) = fields.iter().find(|(n, _)| n == fname) else {
                        return Err(format!("record literal is missing field `{fname}`"));
                    };
                    out.push(self.literal(x, fty)?);
                }
                if let Some((n, _)) = fields.iter().find(|(n, _)| def.field_index(n).is_none()) {
                    return Err(format!("type `{}` has no field `{n}`", def.name));
                }
                Ok(Value::Record(out))
            }
            _ => Err(mismatch()),
        }
    }

    fn guard(&mut self, g: &SExpr) -> Option<Guard> {
        let scope = Scope::default();
        let expr = self.expr(g, &scope)?;
        if expr.ty != Ty::Bool {
            self.err(
                g.pos,
                format!("type mismatch: guard has type {}, expected bool", expr.ty),
            );
            return None;
        }
        let mut atoms = Vec::new();
        let tree = split_atoms(&expr, &mut atoms);
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].contains(a) {
                self.err(g.pos, "repeated atomic condition in guard");
                return None;
            }
        }
        Some(Guard {
            expr,
            atoms,
            tree,
            text: show(g),
        })
    }

    fn stmts(&mut self, body: &[SStmt], scope: &mut Scope, slots: &mut usize) -> Vec<Stmt> {
        let mut out = Vec::new();
        for s in body {
            match s {
                SStmt::Assign { target, value, pos } => {
                    let place = self.place(target, scope);
                    let val = self.expr(value, scope);
                    if let (Some(place), Some(val)) = (place, val) {
                        if !compatible(&place.ty, &val.ty) {
                            self.err(
                                value.pos,
                                format!("type mismatch: cannot assign {} to {}", val.ty, place.ty),
                            );
                            continue;
                        }
                        out.push(Stmt::Assign {
                            target: place,
                            value: val,
                            pos: *pos,
                        });
                    }
                }
                SStmt::If {
                    cond,
                    then_branch,
                    else_branch,
                    ..
                } => {
                    let c = self.expr(cond, scope);
                    let t = self.stmts(then_branch, scope, slots);
                    let e = self.stmts(else_branch, scope, slots);
                    if let Some(c) = c {
                        if c.ty != Ty::Bool {
                            self.err(
                                cond.pos,
                                format!(
                                    "type mismatch: condition has type {}, expected bool",
                                    c.ty
                                ),
                            );
                            continue;
                        }
                        out.push(Stmt::If {
                            cond: c,
                            then_branch: t,
                            else_branch: e,
                        });
                    }
                }
                SStmt::For {
                    var,
                    lo,
                    hi,
                    body,
                    pos,
                } => {
                    let l = self.const_int(lo);
                    let h = self.const_int(hi);
                    let (l, h) = match (l, h) {
                        (Ok(l), Ok(h)) => (l, h),
                        (l, h) => {
                            if l.is_err() {
                                self.err(lo.pos, "non-constant loop bound");
                            }
                            if h.is_err() {
                                self.err(hi.pos, "non-constant loop bound");
                            }
                            continue;
                        }
                    };
                    if h < l {
                        self.err(*pos, format!("loop range {l}..{h} is decreasing"));
                        continue;
                    }
                    let slot = *slots;
                    *slots += 1;
                    scope.loops.push(LoopScope {
                        name: var.clone(),
                        slot,
                        lo: l,
                        hi: (h - 1).max(l),
                    });
                    let b = self.stmts(body, scope, slots);
                    scope.loops.pop();
                    out.push(Stmt::For {
                        var: slot,
                        lo: l,
                        hi: h,
                        body: b,
                    });
                }
            }
        }
        out
    }

    fn place(&mut self, e: &SExpr, scope: &Scope) -> Option<Place> {
        match &e.kind {
            SExprKind::Ident(n) => {
                if scope.loops.iter().any(|l| &l.name == n) {
                    self.err(e.pos, format!("cannot assign to loop counter `{n}`"));
                    return None;
                }
                if let Some(i) = self.outputs.iter().position(|o| &o.name == n) {
                    return Some(Place {
                        output: i,
                        path: Vec::new(),
                        ty: self.outputs[i].ty.clone(),
                    });
                }
                if self.inputs.iter().any(|v| &v.name == n) {
                    self.err(e.pos, format!("cannot assign to input `{n}`"));
                } else {
                    self.err(e.pos, format!("unknown identifier `{n}`"));
                }
                None
            }
            SExprKind::Field(base, f) => {
                let mut p = self.place(base, scope)?;
                let Ty::Record(def) = &p.ty else {
                    self.err(e.pos, format!("type {} has no fields", p.ty));
                    return None;
                };
                let Some(i) = def.field_index(f) else {
                    self.err(e.pos, format!("type `{}` has no field `{f}`", def.name));
                    return None;
                };
                let ty = def.fields[i].1.clone();
                p.path.push(Access::Field(i));
                p.ty = ty;
                Some(p)
            }
            SExprKind::Index(base, idx) => {
                let mut p = self.place(base, scope)?;
                let i = self.expr(idx, scope)?;
                let Ty::Array(elem, len) = &p.ty else {
                    self.err(e.pos, format!("type {} is not an array", p.ty));
                    return None;
                };
                let elem = (**elem).clone();
                self.check_index(&i, *len, idx.pos)?;
                p.path.push(Access::Index(i));
                p.ty = elem;
                Some(p)
            }
            _ => {
                self.err(e.pos, format!("`{}` is not assignable", show(e)));
                None
            }
        }
    }

    fn check_index(&mut self, i: &Expr, len: usize, pos: Pos) -> Option<()> {
        let Ty::Int { lo, hi } = i.ty else {
            self.err(pos, format!("type mismatch: array index has type {}", i.ty));
            return None;
        };
        if lo < 0 || hi >= len as i64 {
            self.err(
                pos,
                format!("array index may be out of bounds (index range {lo}..{hi}, length {len})"),
            );
            return None;
        }
        Some(())
    }

    fn expr(&mut self, e: &SExpr, scope: &Scope) -> Option<Expr> {
        let int = |lo, hi| Ty::Int { lo, hi };
        match &e.kind {
            SExprKind::Int(v) => Some(Expr {
                kind: ExprKind::Const(Value::Int(*v)),
                ty: int(*v, *v),
            }),
            SExprKind::Bool(b) => Some(Expr {
                kind: ExprKind::Const(Value::Bool(*b)),
                ty: Ty::Bool,
            }),
            SExprKind::Ident(n) => {
                if let Some(l) = scope.loops.iter().rev().find(|l| &l.name == n) {
                    return Some(Expr {
                        kind: ExprKind::LoopVar(l.slot),
                        ty: int(l.lo, l.hi),
                    });
                }
                if let Some(i) = self.inputs.iter().position(|v| &v.name == n) {
                    return Some(Expr {
                        kind: ExprKind::Input(i),
                        ty: self.inputs[i].ty.clone(),
                    });
                }
                if let Some(i) = self.outputs.iter().position(|v| &v.name == n) {
                    return Some(Expr {
                        kind: ExprKind::Output(i),
                        ty: self.outputs[i].ty.clone(),
                    });
                }
                if let Some(&v) = self.consts.get(n) {
                    return Some(Expr {
                        kind: ExprKind::Const(Value::Int(v)),
                        ty: int(v, v),
                    });
                }
                if let Some(&(en, ord)) = self.variants.get(n) {
                    return Some(Expr {
                        kind: ExprKind::Const(Value::Enum(ord)),
                        ty: Ty::Enum(self.enums[en].clone()),
                    });
                }
                self.err(e.pos, format!("unknown identifier `{n}`"));
                None
            }
            SExprKind::Field(base, f) => {
                let b = self.expr(base, scope)?;
                let Ty::Record(def) = &b.ty else {
                    self.err(e.pos, format!("type {} has no fields", b.ty));
                    return None;
                };
                let Some(i) = def.field_index(f) else {
                    self.err(e.pos, format!("type `{}` has no field `{f}`", def.name));
                    return None;
                };
                let ty = def.fields[i].1.clone();
                Some(Expr {
                    kind: ExprKind::Field(Box::new(b), i),
                    ty,
                })
            }
            SExprKind::Index(base, idx) => {
                let b = self.expr(base, scope);
                let i = self.expr(idx, scope)?;
                let b = b?;
                let Ty::Array(elem, len) = &b.ty else {
                    self.err(e.pos, format!("type {} is not an array", b.ty));
                    return None;
                };
                let elem = (**elem).clone();
                self.check_index(&i, *len, idx.pos)?;
                Some(Expr {
                    kind: ExprKind::Index(Box::new(b), Box::new(i)),
                    ty: elem,
                })
            }
            SExprKind::Unary(op, x) => {
                let x = self.expr(x, scope)?;
                let ty = match (op, &x.ty) {
                    (UnOp::Not, Ty::Bool) => Ty::Bool,
                    (UnOp::Neg, Ty::Int { lo, hi }) => match (hi.checked_neg(), lo.checked_neg()) {
                        (Some(a), Some(b)) => int(a, b),
                        _ => {
                            self.err(e.pos, "integer expression range overflows");
                            return None;
                        }
                    },
                    _ => {
                        self.err(
                            e.pos,
                            format!("type mismatch: operator cannot be applied to {}", x.ty),
                        );
                        return None;
                    }
                };
                Some(Expr {
                    kind: ExprKind::Unary(*op, Box::new(x)),
                    ty,
                })
            }
            SExprKind::Binary(op, a, b) => {
                let a = self.expr(a, scope);
                let b = self.expr(b, scope);
                let (a, b) = (a?, b?);
                let ty = match op {
                    BinOp::And | BinOp::Or => {
                        (a.ty == Ty::Bool && b.ty == Ty::Bool).then_some(Ty::Bool)
                    }
                    BinOp::Eq | BinOp::Ne => compatible(&a.ty, &b.ty).then_some(Ty::Bool),
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => match (&a.ty, &b.ty) {
                        (Ty::Int { .. }, Ty::Int { .. }) => Some(Ty::Bool),
                        (Ty::Enum(x), Ty::Enum(y)) if x.name == y.name => Some(Ty::Bool),
                        _ => None,
                    },
                    BinOp::Add | BinOp::Sub | BinOp::Mul => match (&a.ty, &b.ty) {
                        (Ty::Int { .. }, Ty::Int { .. }) => {
                            match arith_interval(*op, interval(&a.ty), interval(&b.ty)) {
                                Some((lo, hi)) => Some(int(lo, hi)),
                                None => {
                                    self.err(e.pos, "integer expression range overflows");
                                    return None;
                                }
                            }
                        }
                        _ => None,
                    },
                };
                let Some(ty) = ty else {
                    self.err(
                        e.pos,
                        format!(
                            "type mismatch: `{}` cannot be applied to {} and {}",
                            op.symbol(),
                            a.ty,
                            b.ty
                        ),
                    );
                    return None;
                };
                Some(Expr {
                    kind: ExprKind::Binary(*op, Box::new(a), Box::new(b)),
                    ty,
                })
            }
            SExprKind::ArrayLit(_) | SExprKind::RecordLit(_) => {
                self.err(
                    e.pos,
                    "aggregate literals are only allowed as output defaults",
                );
                None
            }
        }
    }
}

fn split_atoms(e: &Expr, atoms: &mut Vec<Expr>) -> CondTree {
    match &e.kind {
        ExprKind::Unary(UnOp::Not, x) => CondTree::Not(Box::new(split_atoms(x, atoms))),
        ExprKind::Binary(BinOp::And, a, b) => CondTree::And(
            Box::new(split_atoms(a, atoms)),
            Box::new(split_atoms(b, atoms)),
        ),
        ExprKind::Binary(BinOp::Or, a, b) => CondTree::Or(
            Box::new(split_atoms(a, atoms)),
            Box::new(split_atoms(b, atoms)),
        ),
        _ => {
            atoms.push(e.clone());
            CondTree::Atom(atoms.len() - 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::model::{parse_model, parser::parse_syntax, validate};

    fn diags(text: &str) -> Vec<String> {
        validate(&parse_syntax(text).unwrap())
            .into_iter()
            .map(|d| d.message)
            .collect()
    }

    #[test]
    fn loop_bound_must_be_constant() {
        let d = diags(
            "model M { input n: int(0, 3) output o: int(0, 3) = 0 initial state S { for i in 0..n { o := i } } }",
        );
        assert_eq!(d, ["non-constant loop bound"]);
    }

    #[test]
    fn unknown_identifier_in_guard() {
        let d = diags("model M { initial state S {} transition S -> S strong when ghost }");
        assert_eq!(d, ["unknown identifier `ghost`"]);
    }

    #[test]
    fn recursive_type_is_rejected() {
        let d = diags("model M { type T { self: T } input x: T initial state S {} }");
        assert!(d.iter().any(|m| m == "recursive type `T`"), "{d:?}");
        let d = diags("model M { type A { b: B } type B { a: A[2] } initial state S {} }");
        assert!(d.iter().any(|m| m.starts_with("recursive type")), "{d:?}");
    }

    #[test]
    fn index_bounds_are_checked_statically() {
        let d = diags(
            "model M { input a: int(0, 9)[3] input k: int(0, 3) output o: int(0, 9) = 0 initial state S { o := a[k] } }",
        );
        assert_eq!(d.len(), 1);
        assert!(
            d[0].starts_with("array index may be out of bounds"),
            "{d:?}"
        );
        let ok = diags(
            "model M { input a: int(0, 9)[3] output o: int(0, 9)[3] = [0, 0, 0] initial state S { for i in 0..3 { o[i] := a[i] } } }",
        );
        assert!(ok.is_empty(), "{ok:?}");
        let over = diags(
            "model M { input a: int(0, 9)[3] output o: int(0, 9) = 0 initial state S { for i in 0..4 { o := a[i] } } }",
        );
        assert_eq!(over.len(), 1, "{over:?}");
    }

    #[test]
    fn assignment_to_input_is_rejected() {
        let d = diags("model M { input a: bool initial state S { a := true } }");
        assert_eq!(d, ["cannot assign to input `a`"]);
    }

    #[test]
    fn duplicate_names_and_states() {
        let d =
            diags("model M { input a: bool output a: bool = false initial state S {} state S {} }");
        assert_eq!(d.len(), 2, "{d:?}");
        assert!(d.iter().all(|m| m.starts_with("duplicate name")));
    }

    #[test]
    fn type_mismatch_and_unknown_variant() {
        let d = diags(
            "model M { enum E { A, B } output o: E = C initial state S { o := 3 } transition S -> S strong when o }",
        );
        assert_eq!(d.len(), 3, "{d:?}");
    }

    #[test]
    fn non_constant_array_length() {
        let d = diags("model M { input n: int(1, 3) input a: bool[n] initial state S {} }");
        assert_eq!(d, ["non-constant array length"]);
    }

    #[test]
    fn initial_state_rules() {
        assert_eq!(
            diags("model M { state S {} }"),
            ["model has no initial state"]
        );
        assert_eq!(
            diags("model M { initial state S {} initial state T {} }"),
            ["more than one initial state"]
        );
        assert_eq!(
            diags("model M { initial state S {} transition S -> X weak when true }"),
            ["unknown state `X`"]
        );
    }

    #[test]
    fn guard_atoms_are_split_at_connectives() {
        let m = parse_model(
            "model M { input a: bool input b: bool input c: int(0, 3) initial state S {} transition S -> S strong when a && !(b || c == 2) }",
        )
        .unwrap();
        let g = &m.transitions[0].guard;
        assert_eq!(g.atoms.len(), 3);
        assert_eq!(g.text, "a && !(b || c == 2)");
    }

    #[test]
    fn repeated_atoms_are_rejected() {
        let d = diags(
            "model M { input a: bool initial state S {} transition S -> S strong when a || a }",
        );
        assert_eq!(d, ["repeated atomic condition in guard"]);
    }

    #[test]
    fn integer_intervals_flow_through_arithmetic() {
        let m = parse_model(
            "model M { input x: int(-2, 3) output o: int(-100, 100) = 0 initial state S { o := x * x - 1 } }",
        )
        .unwrap();
        let crate::model::Stmt::Assign { value, .. } = &m.states[0].body[0] else {
            panic!()
        };
        assert_eq!(value.ty, crate::model::Ty::Int { lo: -7, hi: 8 });
    }
}
