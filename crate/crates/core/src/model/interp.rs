//! Concrete cycle interpreter: the semantic ground truth.

use thiserror::Error;

use super::ast::{BinOp, Pos, TransitionKind, UnOp};
use super::types::Value;
use super::{Access, Expr, ExprKind, Fired, Model, Place, StateId, Stmt, TransitionId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Fault {
    #[error("{pos}: value {value} assigned to `{target}` is outside its declared range")]
    RangeViolation {
        target: String,
        value: String,
        pos: Pos,
    },
    #[error("input or output record does not match the model: {0}")]
    ShapeMismatch(String),
    #[error("unknown state #{0}")]
    UnknownState(StateId),
}

/// Atomic-condition values of one evaluated guard.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GuardEval {
    pub transition: TransitionId,
    pub conditions: Vec<bool>,
    pub outcome: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleResult {
    pub next: StateId,
    pub outputs: Vec<Value>,
    pub fired: Fired,
    pub weak_fired: bool,
    /// Guards evaluated this cycle, in priority order, up to the one that held.
    pub guards: Vec<GuardEval>,
    /// Statements executed; bounded by the unrolled size of the state body.
    pub executed: usize,
}

/// Declared defaults of every output, in declaration order.
pub fn default_values(model: &Model) -> Vec<Value> {
    model.outputs.iter().map(|o| o.default.clone()).collect()
}

struct Env<'a> {
    inputs: &'a [Value],
    outputs: &'a [Value],
    loops: &'a [i64],
}

fn code(v: &Value) -> i64 {
    v.code().expect("scalar operand")
}

pub(crate) fn apply_binary(op: BinOp, a: &Value, b: &Value) -> Value {
    match op {
        BinOp::And => Value::Bool(a.as_bool().unwrap() && b.as_bool().unwrap()),
        BinOp::Or => Value::Bool(a.as_bool().unwrap() || b.as_bool().unwrap()),
        BinOp::Eq => Value::Bool(a == b),
        BinOp::Ne => Value::Bool(a != b),
        BinOp::Lt => Value::Bool(code(a) < code(b)),
        BinOp::Le => Value::Bool(code(a) <= code(b)),
        BinOp::Gt => Value::Bool(code(a) > code(b)),
        BinOp::Ge => Value::Bool(code(a) >= code(b)),
        BinOp::Add => Value::Int(code(a) + code(b)),
        BinOp::Sub => Value::Int(code(a) - code(b)),
        BinOp::Mul => Value::Int(code(a) * code(b)),
    }
}

fn eval(e: &Expr, env: &Env) -> Value {
    match &e.kind {
        ExprKind::Const(v) => v.clone(),
        ExprKind::Input(i) => env.inputs[*i].clone(),
        ExprKind::Output(i) => env.outputs[*i].clone(),
        ExprKind::LoopVar(s) => Value::Int(env.loops[*s]),
        ExprKind::Field(b, i) => match eval(b, env) {
            Value::Record(mut fs) => fs.swap_remove(*i),
            v => panic!("field access on {v:?}"),
        },
        ExprKind::Index(b, i) => {
            let idx = code(&eval(i, env)) as usize;
            match eval(b, env) {
                Value::Array(mut xs) => xs.swap_remove(idx),
                v => panic!("index on {v:?}"),
            }
        }
        ExprKind::Unary(UnOp::Not, x) => Value::Bool(!eval(x, env).as_bool().unwrap()),
        ExprKind::Unary(UnOp::Neg, x) => Value::Int(-code(&eval(x, env))),
        ExprKind::Binary(op, a, b) => {
            // Both sides are always evaluated: expressions are side-effect free.
            let (a, b) = (eval(a, env), eval(b, env));
            apply_binary(*op, &a, &b)
        }
    }
}

/// Evaluates a guard-scope expression (inputs and previous outputs).
pub fn eval_expr(e: &Expr, inputs: &[Value], outputs: &[Value]) -> Value {
    eval(
        e,
        &Env {
            inputs,
            outputs,
            loops: &[],
        },
    )
}

fn place_name(model: &Model, p: &Place, indices: &[usize]) -> String {
    let mut s = model.outputs[p.output].name.clone();
    let mut ty = &model.outputs[p.output].ty;
    let mut k = 0;
    for a in &p.path {
        match (a, ty) {
            (Access::Field(i), super::Ty::Record(r)) => {
                s.push('.');
                s.push_str(&r.fields[*i].0);
                ty = &r.fields[*i].1;
            }
            (Access::Index(_), super::Ty::Array(elem, _)) => {
                s.push_str(&format!("[{}]", indices[k]));
                k += 1;
                ty = elem;
            }
            _ => unreachable!("validated place"),
        }
    }
    s
}

struct Exec<'a> {
    model: &'a Model,
    inputs: &'a [Value],
    outputs: Vec<Value>,
    loops: Vec<i64>,
    executed: usize,
}

impl Exec<'_> {
    fn block(&mut self, body: &[Stmt]) -> Result<(), Fault> {
        for s in body {
            self.executed += 1;
            match s {
                Stmt::Assign { target, value, pos } => {
                    let env = Env {
                        inputs: self.inputs,
                        outputs: &self.outputs,
                        loops: &self.loops,
                    };
                    let v = eval(value, &env);
                    let indices: Vec<usize> = target
                        .path
                        .iter()
                        .filter_map(|a| match a {
                            Access::Index(e) => Some(code(&eval(e, &env)) as usize),
                            Access::Field(_) => None,
                        })
                        .collect();
                    if !v.conforms_to(&target.ty) {
                        return Err(Fault::RangeViolation {
                            target: place_name(self.model, target, &indices),
                            value: format!("{}", v.display(&target.ty)),
                            pos: *pos,
                        });
                    }
                    let mut slot = &mut self.outputs[target.output];
                    let mut k = 0;
                    for a in &target.path {
                        slot = match (a, slot) {
                            (Access::Field(i), Value::Record(fs)) => &mut fs[*i],
                            (Access::Index(_), Value::Array(xs)) => {
                                k += 1;
                                &mut xs[indices[k - 1]]
                            }
                            _ => unreachable!("validated place"),
                        };
                    }
                    *slot = v;
                }
                Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    let env = Env {
                        inputs: self.inputs,
                        outputs: &self.outputs,
                        loops: &self.loops,
                    };
                    if eval(cond, &env).as_bool().unwrap() {
                        self.block(then_branch)?;
                    } else {
                        self.block(else_branch)?;
                    }
                }
                Stmt::For { var, lo, hi, body } => {
                    for i in *lo..*hi {
                        self.loops[*var] = i;
                        self.block(body)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_shape(model: &Model, inputs: &[Value], prev: &[Value]) -> Result<(), Fault> {
    if inputs.len() != model.inputs.len() {
        return Err(Fault::ShapeMismatch(format!(
            "{} inputs given, model has {}",
            inputs.len(),
            model.inputs.len()
        )));
    }
    if prev.len() != model.outputs.len() {
        return Err(Fault::ShapeMismatch(format!(
            "{} outputs given, model has {}",
            prev.len(),
            model.outputs.len()
        )));
    }
    for (v, var) in inputs.iter().zip(&model.inputs) {
        if !v.conforms_to(&var.ty) {
            return Err(Fault::ShapeMismatch(format!("input `{}`", var.name)));
        }
    }
    for (v, var) in prev.iter().zip(&model.outputs) {
        if !v.conforms_to(&var.ty) {
            return Err(Fault::ShapeMismatch(format!("output `{}`", var.name)));
        }
    }
    Ok(())
}

/// Runs one synchronous cycle from `state`.
///
/// The first outgoing transition (declaration order) whose guard holds fires.
/// A strong transition computes outputs with the target's equations; a weak
/// one with the source's. Without a firing guard the machine stays put and
/// re-runs its own equations. Output leaves not assigned keep `prev`.
pub fn eval_cycle(
    model: &Model,
    state: StateId,
    inputs: &[Value],
    prev: &[Value],
) -> Result<CycleResult, Fault> {
    let st = model.states.get(state).ok_or(Fault::UnknownState(state))?;
    check_shape(model, inputs, prev)?;

    let mut guards = Vec::new();
    let mut fired = Fired::SelfLoop;
    for &t in &st.outgoing {
        let g = &model.transitions[t].guard;
        let conditions: Vec<bool> = g
            .atoms
            .iter()
            .map(|a| eval_expr(a, inputs, prev).as_bool().unwrap())
            .collect();
        let outcome = g.tree.eval(&conditions);
        guards.push(GuardEval {
            transition: t,
            conditions,
            outcome,
        });
        if outcome {
            fired = Fired::Transition(t);
            break;
        }
    }

    let (next, body_state, weak_fired) = match fired {
        Fired::SelfLoop => (state, state, false),
        Fired::Transition(t) => {
            let tr = &model.transitions[t];
            match tr.kind {
                TransitionKind::Strong => (tr.target, tr.target, false),
                TransitionKind::Weak => (tr.target, tr.source, true),
            }
        }
    };
    let body = &model.states[body_state];
    let mut exec = Exec {
        model,
        inputs,
        outputs: prev.to_vec(),
        loops: vec![0; body.loop_slots],
        executed: 0,
    };
    exec.block(&body.body)?;
    Ok(CycleResult {
        next,
        outputs: exec.outputs,
        fired,
        weak_fired,
        guards,
        executed: exec.executed,
    })
}
