use serde::{Deserialize, Serialize};

use crate::model::{
    Access, BinOp, Expr, ExprKind, Fault, Fired, Model, Place, Pos, StateId, Stmt, TransitionKind,
    Ty, Value,
};
use crate::solver::{SolveResult, Solver};

use super::expr::{Assignment, SymExpr, SymValue, Symbol};

/// How guards are split into branches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForkMode {
    /// One true/false fork per guard.
    Decision,
    /// One true/false fork per atomic condition of each evaluated guard, so
    /// every feasible condition vector gets its own path.
    #[default]
    Condition,
}

/// Symbolic machine configuration at a cycle boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct SymState {
    pub state: StateId,
    pub inputs: Vec<SymValue>,
    pub outputs: Vec<SymValue>,
    pub pc: Vec<SymExpr>,
    /// A feasibility query on this path timed out; `pc` may be unsatisfiable.
    pub unproven: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Successor {
    pub state: SymState,
    pub fired: Fired,
    pub weak_fired: bool,
}

/// A feasible path through the cycle that ends in a runtime fault.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultPath {
    pub pc: Vec<SymExpr>,
    pub fault: Fault,
    pub fired: Fired,
    pub witness: Option<Assignment>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepResult {
    pub successors: Vec<Successor>,
    pub faults: Vec<FaultPath>,
    /// Branches retained because the solver ran out of budget.
    pub retained_on_timeout: usize,
}

/// Fresh symbols for every primitive input leaf, named `inC.<leaf path>`.
pub fn fresh_symbols(model: &Model, sequence: u32) -> Vec<SymValue> {
    model
        .inputs
        .iter()
        .map(|v| fresh(format!("inC.{}", v.name), &v.ty, sequence))
        .collect()
}

fn fresh(path: String, ty: &Ty, sequence: u32) -> SymValue {
    match ty {
        Ty::Array(elem, len) => SymValue::Array(
            (0..*len)
                .map(|i| fresh(format!("{path}[{i}]"), elem, sequence))
                .collect(),
        ),
        Ty::Record(r) => SymValue::Record(
            r.fields
                .iter()
                .map(|(name, t)| fresh(format!("{path}.{name}"), t, sequence))
                .collect(),
        ),
        t => SymValue::Scalar(SymExpr::sym(&Symbol::new(path, t.clone(), sequence))),
    }
}

/// Output record of default values as symbolic constants.
pub fn sym_defaults(model: &Model) -> Vec<SymValue> {
    model
        .outputs
        .iter()
        .map(|o| SymValue::from_value(&o.default))
        .collect()
}

pub(crate) fn eval_sym(
    e: &Expr,
    inputs: &[SymValue],
    outputs: &[SymValue],
    loops: &[i64],
) -> SymValue {
    let ev = |x: &Expr| eval_sym(x, inputs, outputs, loops);
    match &e.kind {
        ExprKind::Const(v) => SymValue::from_value(v),
        ExprKind::Input(i) => inputs[*i].clone(),
        ExprKind::Output(i) => outputs[*i].clone(),
        ExprKind::LoopVar(s) => SymValue::Scalar(SymExpr::Const(Value::Int(loops[*s]))),
        ExprKind::Field(b, i) => ev(b).children()[*i].clone(),
        ExprKind::Index(b, i) => {
            let base = ev(b);
            let idx = ev(i).into_scalar();
            match idx.as_const().and_then(Value::code) {
                Some(k) => base.children()[k as usize].clone(),
                None => SymValue::select(base.children(), &idx),
            }
        }
        ExprKind::Unary(op, x) => SymValue::Scalar(SymExpr::unary(*op, ev(x).into_scalar())),
        ExprKind::Binary(op, a, b) => {
            let (a, b) = (ev(a), ev(b));
            match (op, &a) {
                (BinOp::Eq, SymValue::Array(_) | SymValue::Record(_)) => {
                    SymValue::Scalar(a.equals(&b))
                }
                (BinOp::Ne, SymValue::Array(_) | SymValue::Record(_)) => {
                    SymValue::Scalar(SymExpr::not(a.equals(&b)))
                }
                _ => SymValue::Scalar(SymExpr::binary(*op, a.into_scalar(), b.into_scalar())),
            }
        }
    }
}

#[derive(Clone)]
struct Branch {
    pc: Vec<SymExpr>,
    outputs: Vec<SymValue>,
    loops: Vec<i64>,
    unproven: bool,
}

fn leaf_types(ty: &Ty, out: &mut Vec<Ty>) {
    match ty {
        Ty::Array(elem, len) => (0..*len).for_each(|_| leaf_types(elem, out)),
        Ty::Record(r) => r.fields.iter().for_each(|(_, t)| leaf_types(t, out)),
        t => out.push(t.clone()),
    }
}

struct Stepper<'a> {
    model: &'a Model,
    inputs: &'a [SymValue],
    prev: &'a [SymValue],
    mode: ForkMode,
    solver: &'a mut Solver,
    faults: Vec<FaultPath>,
    retained: usize,
    fired: Fired,
}

impl Stepper<'_> {
    /// `b` with `cond` appended, unless proven infeasible. The solver's model
    /// is returned alongside when one was found.
    fn extend(&mut self, b: &Branch, cond: SymExpr) -> Option<(Branch, Option<Assignment>)> {
        let mut pc = b.pc.clone();
        pc.push(cond);
        match self.solver.solve(&pc) {
            SolveResult::Unsat => None,
            SolveResult::Sat(a) => Some((Branch { pc, ..b.clone() }, Some(a))),
            SolveResult::Timeout => {
                self.retained += 1;
                Some((
                    Branch {
                        pc,
                        unproven: true,
                        ..b.clone()
                    },
                    None,
                ))
            }
        }
    }

    /// Splits `b` on `cond` into its feasible (true, false) continuations.
    fn split(&mut self, b: &Branch, cond: &SymExpr) -> (Option<Branch>, Option<Branch>) {
        match cond.as_bool_const() {
            Some(true) => return (Some(b.clone()), None),
            Some(false) => return (None, Some(b.clone())),
            None => {}
        }
        let t = self.extend(b, cond.clone()).map(|x| x.0);
        let negated = SymExpr::not(cond.clone());
        let f = if t.is_none() && !b.unproven {
            // The parent is satisfiable and the true side is not.
            let mut f = b.clone();
            f.pc.push(negated);
            Some(f)
        } else {
            self.extend(b, negated).map(|x| x.0)
        };
        (t, f)
    }

    /// Guard evaluation from outgoing transition `k` on, in DFS order.
    fn guards(&mut self, b: Branch, state: StateId, k: usize, out: &mut Vec<(Branch, Fired)>) {
        let outgoing = &self.model.states[state].outgoing;
        let Some(&t) = outgoing.get(k) else {
            out.push((b, Fired::SelfLoop));
            return;
        };
        let guard = &self.model.transitions[t].guard;
        match self.mode {
            ForkMode::Decision => {
                let g = eval_sym(&guard.expr, self.inputs, self.prev, &[]).into_scalar();
                let (yes, no) = self.split(&b, &g);
                if let Some(y) = yes {
                    out.push((y, Fired::Transition(t)));
                }
                if let Some(n) = no {
                    self.guards(n, state, k + 1, out);
                }
            }
            ForkMode::Condition => {
                let atoms: Vec<SymExpr> = guard
                    .atoms
                    .iter()
                    .map(|a| eval_sym(a, self.inputs, self.prev, &[]).into_scalar())
                    .collect();
                let mut leaves = vec![(b, Vec::with_capacity(atoms.len()))];
                for atom in &atoms {
                    let mut next = Vec::with_capacity(leaves.len() * 2);
                    for (branch, bits) in leaves {
                        let (yes, no) = self.split(&branch, atom);
                        if let Some(y) = yes {
                            let mut v: Vec<bool> = bits.clone();
                            v.push(true);
                            next.push((y, v));
                        }
                        if let Some(n) = no {
                            let mut v = bits;
                            v.push(false);
                            next.push((n, v));
                        }
                    }
                    leaves = next;
                }
                for (branch, bits) in leaves {
                    if guard.tree.eval(&bits) {
                        out.push((branch, Fired::Transition(t)));
                    } else {
                        self.guards(branch, state, k + 1, out);
                    }
                }
            }
        }
    }

    fn block(&mut self, body: &[Stmt], mut branches: Vec<Branch>) -> Vec<Branch> {
        for s in body {
            let mut next = Vec::with_capacity(branches.len());
            for b in branches {
                self.stmt(s, b, &mut next);
            }
            branches = next;
        }
        branches
    }

    fn stmt(&mut self, s: &Stmt, b: Branch, out: &mut Vec<Branch>) {
        match s {
            Stmt::Assign { target, value, pos } => {
                let v = eval_sym(value, self.inputs, &b.outputs, &b.loops);
                for (b, indices) in self.resolve_indices(b, &target.path) {
                    self.assign(b, target, &indices, v.clone(), &value.ty, *pos, out);
                }
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = eval_sym(cond, self.inputs, &b.outputs, &b.loops).into_scalar();
                let (yes, no) = self.split(&b, &c);
                if let Some(y) = yes {
                    out.extend(self.block(then_branch, vec![y]));
                }
                if let Some(n) = no {
                    out.extend(self.block(else_branch, vec![n]));
                }
            }
            Stmt::For { var, lo, hi, body } => {
                let mut branches = vec![b];
                for i in *lo..*hi {
                    for b in &mut branches {
                        b.loops[*var] = i;
                    }
                    branches = self.block(body, branches);
                }
                out.extend(branches);
            }
        }
    }

    /// Concretizes every index of an assignment path, forking one branch per
    /// feasible value of a symbolic index.
    fn resolve_indices(&mut self, b: Branch, path: &[Access]) -> Vec<(Branch, Vec<usize>)> {
        let mut partial = vec![(b, Vec::new())];
        for a in path {
            let Access::Index(e) = a else { continue };
            let mut next = Vec::new();
            for (b, idx) in partial {
                let i = eval_sym(e, self.inputs, &b.outputs, &b.loops).into_scalar();
                if let Some(k) = i.as_const().and_then(Value::code) {
                    let mut idx = idx;
                    idx.push(k as usize);
                    next.push((b, idx));
                    continue;
                }
                let (lo, hi) = match e.ty {
                    Ty::Int { lo, hi } => (lo, hi),
                    _ => unreachable!("integer index"),
                };
                let mut rest = Some(b);
                for k in lo..=hi {
                    let Some(cur) = rest.take() else { break };
                    let cond = SymExpr::eq(i.clone(), SymExpr::Const(Value::Int(k)));
                    let (yes, no) = self.split(&cur, &cond);
                    if let Some(y) = yes {
                        let mut idx = idx.clone();
                        idx.push(k as usize);
                        next.push((y, idx));
                    }
                    rest = no;
                }
            }
            partial = next;
        }
        partial
    }

    #[allow(clippy::too_many_arguments)]
    fn assign(
        &mut self,
        b: Branch,
        target: &Place,
        indices: &[usize],
        v: SymValue,
        value_ty: &Ty,
        pos: Pos,
        out: &mut Vec<Branch>,
    ) {
        let (mut src, mut dst) = (Vec::new(), Vec::new());
        leaf_types(value_ty, &mut src);
        leaf_types(&target.ty, &mut dst);
        let mut in_range = SymExpr::tt();
        for ((leaf, s), d) in v.leaves().into_iter().zip(&src).zip(&dst) {
            if let (Ty::Int { lo: sl, hi: sh }, Ty::Int { lo, hi }) = (s, d) {
                if sl < lo || sh > hi {
                    let ok = SymExpr::and(
                        SymExpr::binary(BinOp::Ge, leaf.clone(), SymExpr::Const(Value::Int(*lo))),
                        SymExpr::binary(BinOp::Le, leaf.clone(), SymExpr::Const(Value::Int(*hi))),
                    );
                    in_range = SymExpr::and(in_range, ok);
                }
            }
        }
        let ok_branch = match in_range.as_bool_const() {
            Some(true) => Some(b),
            Some(false) => {
                self.record_fault(b.pc.clone(), None, target, indices, &v, pos);
                None
            }
            None => {
                let ok = self.extend(&b, in_range.clone()).map(|x| x.0);
                if let Some((bad, witness)) = self.extend(&b, SymExpr::not(in_range)) {
                    self.record_fault(bad.pc, witness, target, indices, &v, pos);
                }
                ok
            }
        };
        if let Some(mut b) = ok_branch {
            let mut slot = &mut b.outputs[target.output];
            let mut k = 0;
            for a in &target.path {
                slot = match a {
                    Access::Field(i) => &mut slot.children_mut()[*i],
                    Access::Index(_) => {
                        k += 1;
                        &mut slot.children_mut()[indices[k - 1]]
                    }
                };
            }
            *slot = v;
            out.push(b);
        }
    }

    fn record_fault(
        &mut self,
        pc: Vec<SymExpr>,
        witness: Option<Assignment>,
        target: &Place,
        indices: &[usize],
        v: &SymValue,
        pos: Pos,
    ) {
        let value = match witness.as_ref().map(|a| v.eval_under(a)) {
            Some(Ok(Value::Int(i))) => i.to_string(),
            Some(Ok(other)) => format!("{other:?}"),
            _ => "?".to_string(),
        };
        self.faults.push(FaultPath {
            pc,
            fault: Fault::RangeViolation {
                target: place_name(self.model, target, indices),
                value,
                pos,
            },
            fired: self.fired,
            witness,
        });
    }
}

fn place_name(model: &Model, p: &Place, indices: &[usize]) -> String {
    let mut s = model.outputs[p.output].name.clone();
    let mut ty = &model.outputs[p.output].ty;
    let mut k = 0;
    for a in &p.path {
        match (a, ty) {
            (Access::Field(i), Ty::Record(r)) => {
                s.push('.');
                s.push_str(&r.fields[*i].0);
                ty = &r.fields[*i].1;
            }
            (Access::Index(_), Ty::Array(elem, _)) => {
                s.push_str(&format!("[{}]", indices[k]));
                k += 1;
                ty = elem;
            }
            _ => unreachable!("validated place"),
        }
    }
    s
}

/// Executes one cycle symbolically from `s`, returning one successor per
/// feasible control path in depth-first, true-branch-first order.
pub fn sym_step(model: &Model, s: &SymState, mode: ForkMode, solver: &mut Solver) -> StepResult {
    let mut st = Stepper {
        model,
        inputs: &s.inputs,
        prev: &s.outputs,
        mode,
        solver,
        faults: Vec::new(),
        retained: 0,
        fired: Fired::SelfLoop,
    };
    let root = Branch {
        pc: s.pc.clone(),
        outputs: s.outputs.clone(),
        loops: Vec::new(),
        unproven: s.unproven,
    };
    let mut decided = Vec::new();
    st.guards(root, s.state, 0, &mut decided);

    let mut successors = Vec::new();
    for (b, fired) in decided {
        let (next, body_state, weak_fired) = match fired {
            Fired::SelfLoop => (s.state, s.state, false),
            Fired::Transition(t) => {
                let tr = &model.transitions[t];
                match tr.kind {
                    TransitionKind::Strong => (tr.target, tr.target, false),
                    TransitionKind::Weak => (tr.target, tr.source, true),
                }
            }
        };
        let body = &model.states[body_state];
        let b = Branch {
            loops: vec![0; body.loop_slots],
            ..b
        };
        st.fired = fired;
        for done in st.block(&body.body, vec![b]) {
            successors.push(Successor {
                state: SymState {
                    state: next,
                    inputs: s.inputs.clone(),
                    outputs: done.outputs,
                    pc: done.pc,
                    unproven: done.unproven,
                },
                fired,
                weak_fired,
            });
        }
    }
    StepResult {
        successors,
        faults: st.faults,
        retained_on_timeout: st.retained,
    }
}

/// Convenience: the initial symbolic state with fresh inputs for cycle 1.
pub fn initial_state(model: &Model) -> SymState {
    SymState {
        state: model.initial,
        inputs: fresh_symbols(model, 1),
        outputs: sym_defaults(model),
        pc: Vec::new(),
        unproven: false,
    }
}
