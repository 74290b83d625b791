//! Concrete test cases: concretization of traces, minimization, SSM scripts.

mod ssm;

use std::collections::BTreeSet;

use serde::Serialize;

use crate::coverage::{observe, Observation};
use crate::driver::PathTrace;
use crate::model::{Fired, Model, StateId, TransitionId, Ty, Value};
use crate::solver::{SolveResult, Solver};

pub use ssm::{emit_ssm, parse_ssm, parse_value, render_value, SsmError};

/// A settable or checkable location: an input or output followed by record
/// fields. Arrays are not split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub path: String,
    pub ty: Ty,
    pub var: usize,
    pub fields: Vec<usize>,
}

impl Slot {
    pub fn get(&self, vars: &[Value]) -> Value {
        let mut v = &vars[self.var];
        for &f in &self.fields {
            v = match v {
                Value::Record(fs) => &fs[f],
                _ => unreachable!("slot path follows record fields"),
            };
        }
        v.clone()
    }

    pub fn set(&self, vars: &mut [Value], value: Value) {
        let mut v = &mut vars[self.var];
        for &f in &self.fields {
            v = match v {
                Value::Record(fs) => &mut fs[f],
                _ => unreachable!("slot path follows record fields"),
            };
        }
        *v = value;
    }
}

fn push_slots(path: String, ty: &Ty, var: usize, fields: Vec<usize>, out: &mut Vec<Slot>) {
    match ty {
        Ty::Record(r) => {
            for (i, (name, t)) in r.fields.iter().enumerate() {
                let mut f = fields.clone();
                f.push(i);
                push_slots(format!("{path}.{name}"), t, var, f, out);
            }
        }
        t => out.push(Slot {
            path,
            ty: t.clone(),
            var,
            fields,
        }),
    }
}

pub fn input_slots(model: &Model) -> Vec<Slot> {
    let mut out = Vec::new();
    for (i, v) in model.inputs.iter().enumerate() {
        push_slots(v.name.clone(), &v.ty, i, Vec::new(), &mut out);
    }
    out
}

pub fn output_slots(model: &Model) -> Vec<Slot> {
    let mut out = Vec::new();
    for (i, v) in model.outputs.iter().enumerate() {
        push_slots(v.name.clone(), &v.ty, i, Vec::new(), &mut out);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestStep {
    pub sets: Vec<(String, Value)>,
    pub checks: Vec<(String, Value)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCase {
    pub id: String,
    pub steps: Vec<TestStep>,
    /// Originating trace id, when generated from one.
    pub trace: Option<usize>,
}

pub fn test_id(n: usize) -> String {
    format!("{n:05}")
}

/// Assigns ids `00001`, `00002`, ... in suite order.
pub fn renumber(tests: &mut [TestCase]) {
    for (i, t) in tests.iter_mut().enumerate() {
        t.id = test_id(i + 1);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Concretized {
    Test(TestCase),
    Infeasible,
    /// The solver ran out of budget.
    Unresolved,
}

/// Solves `trace.pc` and turns the model into a test: one step per cycle,
/// sets from the cycle's input symbols, checks from its output snapshot.
/// Unconstrained inputs take their type's first value.
pub fn concretize(model: &Model, trace: &PathTrace, solver: &mut Solver) -> Concretized {
    let mut a = match solver.solve(&trace.pc) {
        SolveResult::Sat(a) => a,
        SolveResult::Unsat => return Concretized::Infeasible,
        SolveResult::Timeout => return Concretized::Unresolved,
    };
    for c in &trace.cycles {
        for s in c.input_symbols() {
            a.entry(s.id.clone()).or_insert_with(|| s.ty.first_value());
        }
    }
    let (ins, outs) = (input_slots(model), output_slots(model));
    let mut steps = Vec::with_capacity(trace.cycles.len());
    for c in &trace.cycles {
        let eval = |vs: &[crate::sym::SymValue]| -> Option<Vec<Value>> {
            vs.iter().map(|v| v.eval_under(&a).ok()).collect()
        };
        let (Some(iv), Some(ov)) = (eval(&c.inputs), eval(&c.outputs)) else {
            return Concretized::Unresolved;
        };
        steps.push(TestStep {
            sets: ins.iter().map(|s| (s.path.clone(), s.get(&iv))).collect(),
            checks: outs.iter().map(|s| (s.path.clone(), s.get(&ov))).collect(),
        });
    }
    Concretized::Test(TestCase {
        id: test_id(trace.id),
        steps,
        trace: Some(trace.id),
    })
}

/// Objective set driving minimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MinimizeMode {
    /// States, transitions and every guard condition vector that takes part
    /// in an MC/DC independence pair.
    Full,
    /// States, transitions and guard decision outcomes.
    Branch,
    /// Keep every candidate.
    Off,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Unit {
    State(StateId),
    Transition(TransitionId),
    Vector(TransitionId, Vec<bool>),
    Outcome(TransitionId, bool),
}

fn independent_vectors(model: &Model, obs: &[Observation]) -> BTreeSet<(TransitionId, Vec<bool>)> {
    let all: BTreeSet<&(TransitionId, Vec<bool>)> = obs.iter().flat_map(|o| &o.vectors).collect();
    let mut keep = BTreeSet::new();
    for (t, v) in &all {
        let tree = &model.transitions[*t].guard.tree;
        for i in 0..v.len() {
            let mut w = v.clone();
            w[i] = !w[i];
            if tree.eval(v) != tree.eval(&w) && all.contains(&(*t, w)) {
                keep.insert((*t, v.clone()));
                break;
            }
        }
    }
    keep
}

/// Greedy set cover over the chosen objective units. Picks the candidate
/// adding the most uncovered units (ties: fewer steps, then lower trace id)
/// until none adds anything. Returns the picks in selection order.
pub fn minimize(model: &Model, candidates: &[TestCase], mode: MinimizeMode) -> Vec<TestCase> {
    if mode == MinimizeMode::Off {
        return candidates.to_vec();
    }
    let obs: Vec<Observation> = candidates
        .iter()
        .map(|t| observe(model, t).unwrap_or_default())
        .collect();
    let useful = independent_vectors(model, &obs);
    let units: Vec<BTreeSet<Unit>> = obs
        .iter()
        .map(|o| {
            let mut u: BTreeSet<Unit> = o.states.iter().map(|s| Unit::State(*s)).collect();
            u.extend(o.transitions.iter().map(|t| Unit::Transition(*t)));
            for (t, v) in &o.vectors {
                match mode {
                    MinimizeMode::Full => {
                        if useful.contains(&(*t, v.clone())) {
                            u.insert(Unit::Vector(*t, v.clone()));
                        }
                    }
                    _ => {
                        let outcome = model.transitions[*t].guard.tree.eval(v);
                        u.insert(Unit::Outcome(*t, outcome));
                    }
                }
            }
            u
        })
        .collect();

    let mut covered: BTreeSet<&Unit> = BTreeSet::new();
    let mut picked = vec![false; candidates.len()];
    let mut out = Vec::new();
    loop {
        let best = (0..candidates.len())
            .filter(|&i| !picked[i])
            .map(|i| (i, units[i].iter().filter(|u| !covered.contains(u)).count()))
            .filter(|&(_, gain)| gain > 0)
            .min_by_key(|&(i, gain)| {
                (
                    std::cmp::Reverse(gain),
                    candidates[i].steps.len(),
                    candidates[i].trace.unwrap_or(usize::MAX),
                    i,
                )
            });
        let Some((i, _)) = best else { break };
        picked[i] = true;
        covered.extend(units[i].iter());
        out.push(candidates[i].clone());
    }
    out
}

/// Suite manifest: `{model, tests: [{id, steps, trace}]}`.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub model: String,
    pub tests: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub id: String,
    pub steps: usize,
    /// Fired transition labels of the originating trace.
    pub trace: Vec<String>,
}

pub fn manifest(model: &Model, tests: &[TestCase], traces: &[PathTrace]) -> Manifest {
    Manifest {
        model: model.name.clone(),
        tests: tests
            .iter()
            .map(|t| ManifestEntry {
                id: t.id.clone(),
                steps: t.steps.len(),
                trace: t
                    .trace
                    .and_then(|id| traces.iter().find(|p| p.id == id))
                    .map(|p| {
                        p.cycles
                            .iter()
                            .map(|c| model.fired_label(c.fired))
                            .collect()
                    })
                    .unwrap_or_default(),
            })
            .collect(),
    }
}

/// Fired sequence of a trace, used by tests and reports.
pub fn fired_labels(model: &Model, fired: &[Fired]) -> Vec<String> {
    fired.iter().map(|f| model.fired_label(*f)).collect()
}
