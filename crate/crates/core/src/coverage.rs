//! Model coverage: states, transitions and MC/DC of transition guards,
//! measured by replaying test cases through the interpreter.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    default_values, eval_cycle, CondTree, CycleResult, Fired, Model, StateId, TransitionId, Value,
};
use crate::oracle::Reach;
use crate::suite::{input_slots, output_slots, parse_ssm, SsmError, TestCase};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Objective {
    StateVisited(StateId),
    TransitionFired(TransitionId),
    GuardConditionMcdc {
        transition: TransitionId,
        condition: usize,
    },
}

impl Objective {
    pub fn kind(&self) -> &'static str {
        match self {
            Objective::StateVisited(_) => "state",
            Objective::TransitionFired(_) => "transition",
            Objective::GuardConditionMcdc { .. } => "mcdc",
        }
    }

    pub fn reference(&self, model: &Model) -> String {
        match self {
            Objective::StateVisited(s) => model.states[*s].name.clone(),
            Objective::TransitionFired(t) => model.transition_label(*t),
            Objective::GuardConditionMcdc {
                transition,
                condition,
            } => format!("{}#c{condition}", model.transition_label(*transition)),
        }
    }
}

/// One objective per state, per transition, and per atomic guard condition,
/// in that order.
pub fn objectives(model: &Model) -> Vec<Objective> {
    let mut out: Vec<Objective> = (0..model.states.len())
        .map(Objective::StateVisited)
        .collect();
    out.extend((0..model.transitions.len()).map(Objective::TransitionFired));
    for t in &model.transitions {
        out.extend(
            (0..t.guard.atoms.len()).map(|condition| Objective::GuardConditionMcdc {
                transition: t.id,
                condition,
            }),
        );
    }
    out
}

/// Conditions with a unique-cause independence pair among `vectors`,
/// found by checking every pair.
pub fn mcdc_oracle(tree: &CondTree, vectors: &[Vec<bool>]) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for (i, a) in vectors.iter().enumerate() {
        for b in &vectors[i + 1..] {
            let diff: Vec<usize> = (0..a.len()).filter(|&k| a[k] != b[k]).collect();
            if diff.len() == 1 && tree.eval(a) != tree.eval(b) {
                out.insert(diff[0]);
            }
        }
    }
    out
}

/// Incremental MC/DC crediting: each new vector is paired against the
/// vectors seen so far by flipping one condition at a time.
#[derive(Debug, Clone)]
pub struct StreamingMcdc {
    tree: CondTree,
    seen: HashSet<Vec<bool>>,
    credited: Vec<bool>,
}

impl StreamingMcdc {
    pub fn new(tree: CondTree, conditions: usize) -> Self {
        StreamingMcdc {
            tree,
            seen: HashSet::new(),
            credited: vec![false; conditions],
        }
    }

    /// Records `v` and returns the conditions it newly credits.
    pub fn observe(&mut self, v: &[bool]) -> Vec<usize> {
        if !self.seen.insert(v.to_vec()) {
            return Vec::new();
        }
        let outcome = self.tree.eval(v);
        let mut new = Vec::new();
        let mut w = v.to_vec();
        for i in 0..v.len() {
            w[i] = !w[i];
            if !self.credited[i] && self.seen.contains(&w) && self.tree.eval(&w) != outcome {
                self.credited[i] = true;
                new.push(i);
            }
            w[i] = !w[i];
        }
        new
    }

    pub fn credited(&self) -> BTreeSet<usize> {
        (0..self.credited.len())
            .filter(|&i| self.credited[i])
            .collect()
    }
}

/// Objective hit tracking over a stream of executed cycles.
#[derive(Debug, Clone)]
pub struct CoverageTracker {
    objectives: Vec<Objective>,
    index: HashMap<Objective, usize>,
    hit: Vec<bool>,
    mcdc: Vec<StreamingMcdc>,
}

impl CoverageTracker {
    pub fn new(model: &Model) -> Self {
        let objectives = objectives(model);
        let index = objectives
            .iter()
            .enumerate()
            .map(|(i, o)| (o.clone(), i))
            .collect();
        CoverageTracker {
            hit: vec![false; objectives.len()],
            objectives,
            index,
            mcdc: model
                .transitions
                .iter()
                .map(|t| StreamingMcdc::new(t.guard.tree.clone(), t.guard.atoms.len()))
                .collect(),
        }
    }

    fn mark(&mut self, o: Objective) -> bool {
        let i = self.index[&o];
        !std::mem::replace(&mut self.hit[i], true)
    }

    /// Credits one executed cycle entered in `entry`; returns how many
    /// objectives became hit.
    pub fn observe_cycle(&mut self, entry: StateId, r: &CycleResult) -> usize {
        let mut new = self.mark(Objective::StateVisited(entry)) as usize;
        if let Fired::Transition(t) = r.fired {
            new += self.mark(Objective::TransitionFired(t)) as usize;
        }
        for g in &r.guards {
            for condition in self.mcdc[g.transition].observe(&g.conditions) {
                new += self.mark(Objective::GuardConditionMcdc {
                    transition: g.transition,
                    condition,
                }) as usize;
            }
        }
        new
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    pub fn hits(&self) -> &[bool] {
        &self.hit
    }

    pub fn hit_count(&self) -> usize {
        self.hit.iter().filter(|h| **h).count()
    }

    pub fn hit_set(&self) -> BTreeSet<Objective> {
        self.objectives
            .iter()
            .zip(&self.hit)
            .filter(|(_, h)| **h)
            .map(|(o, _)| o.clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error(transparent)]
    Script(#[from] SsmError),
    #[error("test {test}, step {step}: {message}")]
    Mismatch {
        test: String,
        step: usize,
        message: String,
    },
}

/// What executing one test exercised.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Observation {
    pub states: BTreeSet<StateId>,
    pub transitions: BTreeSet<TransitionId>,
    pub vectors: BTreeSet<(TransitionId, Vec<bool>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub test: String,
    pub step: usize,
    pub path: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

/// Executes `test` from the initial state and default outputs, calling
/// `on_cycle` for every completed cycle. A runtime fault ends the test and
/// is returned as a failed check.
pub fn replay(
    model: &Model,
    test: &TestCase,
    mut on_cycle: impl FnMut(StateId, &CycleResult),
) -> Result<Vec<CheckResult>, CoverError> {
    let (ins, outs) = (input_slots(model), output_slots(model));
    let mut state = model.initial;
    let mut outputs = default_values(model);
    let mut checks = Vec::new();
    for (k, step) in test.steps.iter().enumerate() {
        let mismatch = |message: String| CoverError::Mismatch {
            test: test.id.clone(),
            step: k + 1,
            message,
        };
        let mut inputs: Vec<Value> = model.inputs.iter().map(|v| v.ty.first_value()).collect();
        for (path, v) in &step.sets {
            let slot = ins
                .iter()
                .find(|s| s.path == *path)
                .ok_or_else(|| mismatch(format!("unknown input `{path}`")))?;
            if !v.conforms_to(&slot.ty) {
                return Err(mismatch(format!(
                    "value for `{path}` does not fit its type"
                )));
            }
            slot.set(&mut inputs, v.clone());
        }
        let r = match eval_cycle(model, state, &inputs, &outputs) {
            Ok(r) => r,
            Err(fault) => {
                checks.push(CheckResult {
                    test: test.id.clone(),
                    step: k + 1,
                    path: String::new(),
                    expected: "no fault".into(),
                    actual: fault.to_string(),
                    pass: false,
                });
                return Ok(checks);
            }
        };
        on_cycle(state, &r);
        for (path, expected) in &step.checks {
            let slot = outs
                .iter()
                .find(|s| s.path == *path)
                .ok_or_else(|| mismatch(format!("unknown output `{path}`")))?;
            if !expected.conforms_to(&slot.ty) {
                return Err(mismatch(format!(
                    "check for `{path}` does not fit its type"
                )));
            }
            let actual = slot.get(&r.outputs);
            checks.push(CheckResult {
                test: test.id.clone(),
                step: k + 1,
                path: path.clone(),
                expected: crate::suite::render_value(expected, &slot.ty),
                actual: crate::suite::render_value(&actual, &slot.ty),
                pass: actual == *expected,
            });
        }
        state = r.next;
        outputs = r.outputs;
    }
    Ok(checks)
}

/// States entered, transitions fired and guard vectors evaluated by `test`.
pub fn observe(model: &Model, test: &TestCase) -> Result<Observation, CoverError> {
    let mut o = Observation::default();
    replay(model, test, |entry, r| {
        o.states.insert(entry);
        if let Fired::Transition(t) = r.fired {
            o.transitions.insert(t);
        }
        for g in &r.guards {
            o.vectors.insert((g.transition, g.conditions.clone()));
        }
    })?;
    Ok(o)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObjectiveHit {
    pub kind: String,
    #[serde(rename = "ref")]
    pub reference: String,
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub model: String,
    pub total: usize,
    pub hit: usize,
    pub percent: u32,
    pub objectives: Vec<ObjectiveHit>,
    pub checks: Vec<CheckResult>,
    /// Objectives no single-state path can exercise, when computed.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unreachable: Vec<String>,
}

impl CoverageReport {
    pub fn failed_checks(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

/// `round(100 * hit / total)`, halves rounded up.
pub fn percent(hit: usize, total: usize) -> u32 {
    if total == 0 {
        return 0;
    }
    ((200 * hit + total) / (2 * total)) as u32
}

/// Replays every test and reports objective hits and check verdicts.
pub fn run_suite(model: &Model, tests: &[TestCase]) -> Result<CoverageReport, CoverError> {
    let mut tracker = CoverageTracker::new(model);
    let mut checks = Vec::new();
    for t in tests {
        checks.extend(replay(model, t, |entry, r| {
            tracker.observe_cycle(entry, r);
        })?);
    }
    let objectives = tracker
        .objectives()
        .iter()
        .zip(tracker.hits())
        .map(|(o, h)| ObjectiveHit {
            kind: o.kind().to_string(),
            reference: o.reference(model),
            hit: *h,
        })
        .collect();
    let (hit, total) = (tracker.hit_count(), tracker.objectives().len());
    Ok(CoverageReport {
        model: model.name.clone(),
        total,
        hit,
        percent: percent(hit, total),
        objectives,
        checks,
        unreachable: Vec::new(),
    })
}

/// [`run_suite`] over an SSM script.
pub fn run_suite_text(model: &Model, script: &str) -> Result<CoverageReport, CoverError> {
    let tests = parse_ssm(model, script)?;
    run_suite(model, &tests)
}

/// Objectives exercisable by some single-state path, per the brute-force
/// simulation.
pub fn reachable_objectives(model: &Model, reach: &Reach) -> BTreeSet<Objective> {
    let mut out = BTreeSet::new();
    out.extend(reach.states.iter().map(|s| Objective::StateVisited(*s)));
    out.extend(
        reach
            .transitions
            .iter()
            .map(|t| Objective::TransitionFired(*t)),
    );
    for (t, vs) in &reach.vectors {
        let vs: Vec<Vec<bool>> = vs.iter().cloned().collect();
        for condition in mcdc_oracle(&model.transitions[*t].guard.tree, &vs) {
            out.insert(Objective::GuardConditionMcdc {
                transition: *t,
                condition,
            });
        }
    }
    out
}

/// Fills `report.unreachable` from a brute-force reach result.
pub fn annotate_unreachable(model: &Model, report: &mut CoverageReport, reach: &Reach) {
    let reachable = reachable_objectives(model, reach);
    report.unreachable = objectives(model)
        .into_iter()
        .filter(|o| !reachable.contains(o))
        .map(|o| format!("{} {}", o.kind(), o.reference(model)))
        .collect();
}

/// Human-readable report.
pub fn render_table(model: &Model, report: &CoverageReport) -> String {
    let mut out = String::new();
    writeln!(out, "coverage of {}", report.model).unwrap();
    let width = report
        .objectives
        .iter()
        .map(|o| o.reference.len())
        .max()
        .unwrap_or(0);
    for o in &report.objectives {
        let mut reference = o.reference.clone();
        if let Some(atom) = mcdc_atom_text(model, &o.reference) {
            reference = format!("{reference:width$}  {atom}");
        }
        writeln!(
            out,
            "  [{}] {:10} {}",
            if o.hit { "x" } else { " " },
            o.kind,
            reference.trim_end()
        )
        .unwrap();
    }
    for u in &report.unreachable {
        writeln!(out, "  unreachable: {u}").unwrap();
    }
    let failed = report.failed_checks();
    writeln!(
        out,
        "objectives {}/{} ({}%), checks {} passed, {} failed",
        report.hit,
        report.total,
        report.percent,
        report.checks.len() - failed,
        failed
    )
    .unwrap();
    for c in report.checks.iter().filter(|c| !c.pass) {
        writeln!(
            out,
            "  FAILED test {} step {} {}: expected {}, got {}",
            c.test, c.step, c.path, c.expected, c.actual
        )
        .unwrap();
    }
    out
}

fn mcdc_atom_text(model: &Model, reference: &str) -> Option<String> {
    let (label, c) = reference.split_once("#c")?;
    let c: usize = c.parse().ok()?;
    let t = (0..model.transitions.len()).find(|t| model.transition_label(*t) == label)?;
    let g = &model.transitions[t].guard;
    Some(format!("condition {} of `{}`", c, g.text))
}
