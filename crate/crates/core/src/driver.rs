//! Exploration of all single-state paths of a model.
//!
//! Each symbolic branch carries its own visited set and stutter flag. A
//! branch keeps stepping while its entry state is unvisited or a stutter
//! is pending; a weak transition fired in a non-stutter cycle grants one
//! stutter cycle, which re-enters the target without marking it visited.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::model::{Fired, Model, StateId};
use crate::solver::{SolveResult, Solver, SolverStats, DEFAULT_BUDGET};
use crate::sym::{
    fresh_symbols, initial_state, sym_step, ForkMode, SymExpr, SymState, SymValue, Symbol,
};

#[derive(Debug, Clone)]
pub struct ExploreConfig {
    pub solver_budget: Duration,
    /// Stop after this many traces.
    pub max_paths: Option<usize>,
    pub fork_mode: ForkMode,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            solver_budget: DEFAULT_BUDGET,
            max_paths: None,
            fork_mode: ForkMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub sequence: u32,
    pub entry: StateId,
    pub fired: Fired,
    pub weak_fired: bool,
    /// Fresh input structure of this cycle.
    pub inputs: Vec<SymValue>,
    /// Output record at the end of the cycle.
    pub outputs: Vec<SymValue>,
}

impl CycleRecord {
    pub fn input_symbols(&self) -> Vec<std::sync::Arc<Symbol>> {
        let mut out = Vec::new();
        for v in &self.inputs {
            for leaf in v.leaves() {
                leaf.collect_symbols(&mut out);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathTrace {
    /// 1-based position in canonical order.
    pub id: usize,
    pub cycles: Vec<CycleRecord>,
    pub pc: Vec<SymExpr>,
    pub terminal: StateId,
    /// Feasibility could not be proven within the solver budget.
    pub unproven: bool,
}

impl PathTrace {
    pub fn fired(&self) -> Vec<Fired> {
        self.cycles.iter().map(|c| c.fired).collect()
    }

    /// (entry state, fired) per cycle.
    pub fn signature(&self) -> Vec<(StateId, Fired)> {
        self.cycles.iter().map(|c| (c.entry, c.fired)).collect()
    }
}

/// A feasible path that hit a runtime fault, with a concrete witness when
/// the solver produced one.
#[derive(Debug, Clone, Serialize)]
pub struct FaultReport {
    pub cycle: u32,
    pub state: String,
    pub message: String,
    pub witness: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct Exploration {
    pub traces: Vec<PathTrace>,
    pub faults: Vec<FaultReport>,
    pub solver: SolverStats,
    pub retained_on_timeout: usize,
    pub dropped_unsat: usize,
    pub truncated: bool,
    pub elapsed: Duration,
}

struct Frame {
    state: SymState,
    visited: Vec<bool>,
    stutter: bool,
    cycles: Vec<CycleRecord>,
}

/// Explores every single-state path of `model`. Always terminates: every
/// branch ends within `2 * states` cycles.
pub fn explore(model: &Model, config: &ExploreConfig) -> Exploration {
    let start = Instant::now();
    let mut solver = Solver::new(config.solver_budget);
    let mut traces = Vec::new();
    let mut faults = Vec::new();
    let mut retained = 0;
    let mut dropped = 0;
    let mut truncated = false;

    let mut stack = vec![Frame {
        state: initial_state(model),
        visited: vec![false; model.states.len()],
        stutter: false,
        cycles: Vec::new(),
    }];
    while let Some(mut f) = stack.pop() {
        let entry = f.state.state;
        if !f.stutter && f.visited[entry] {
            if f.state.unproven {
                match solver.solve(&f.state.pc) {
                    SolveResult::Unsat => {
                        dropped += 1;
                        continue;
                    }
                    SolveResult::Sat(_) => f.state.unproven = false,
                    SolveResult::Timeout => {}
                }
            }
            if config.max_paths.is_some_and(|m| traces.len() >= m) {
                truncated = true;
                break;
            }
            traces.push(PathTrace {
                id: 0,
                cycles: f.cycles,
                pc: f.state.pc,
                terminal: entry,
                unproven: f.state.unproven,
            });
            continue;
        }
        let sequence = f.cycles.len() as u32 + 1;
        f.state.inputs = fresh_symbols(model, sequence);
        let step = sym_step(model, &f.state, config.fork_mode, &mut solver);
        retained += step.retained_on_timeout;
        for fault in &step.faults {
            faults.push(FaultReport {
                cycle: sequence,
                state: model.states[entry].name.clone(),
                message: fault.fault.to_string(),
                witness: fault
                    .witness
                    .iter()
                    .flatten()
                    .map(|(id, v)| (id.to_string(), format!("{v:?}")))
                    .collect(),
            });
        }
        let mut visited = f.visited;
        if !f.stutter {
            visited[entry] = true;
        }
        // Reverse so the first successor is explored first.
        for succ in step.successors.into_iter().rev() {
            let mut cycles = f.cycles.clone();
            cycles.push(CycleRecord {
                sequence,
                entry,
                fired: succ.fired,
                weak_fired: succ.weak_fired,
                inputs: f.state.inputs.clone(),
                outputs: succ.state.outputs.clone(),
            });
            stack.push(Frame {
                state: succ.state,
                visited: visited.clone(),
                stutter: !f.stutter && succ.weak_fired,
                cycles,
            });
        }
    }

    // Canonical order: lexicographic by fired sequence, self-loop first,
    // depth-first order among equal sequences.
    traces.sort_by_key(PathTrace::fired);
    for (i, t) in traces.iter_mut().enumerate() {
        t.id = i + 1;
    }
    Exploration {
        traces,
        faults,
        solver: solver.stats,
        retained_on_timeout: retained,
        dropped_unsat: dropped,
        truncated,
        elapsed: start.elapsed(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStats {
    pub paths: usize,
    pub time_s: f64,
    pub avg_steps: f64,
    pub max_steps: usize,
    pub solver: SolverStats,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Path count, time and step statistics; averages rounded to 2 decimals.
pub fn trace_stats(traces: &[PathTrace], elapsed: Duration, solver: SolverStats) -> TraceStats {
    let lengths: Vec<usize> = traces.iter().map(|t| t.cycles.len()).collect();
    let avg = if lengths.is_empty() {
        0.0
    } else {
        lengths.iter().sum::<usize>() as f64 / lengths.len() as f64
    };
    TraceStats {
        paths: traces.len(),
        time_s: round2(elapsed.as_secs_f64()),
        avg_steps: round2(avg),
        max_steps: lengths.into_iter().max().unwrap_or(0),
        solver,
    }
}

/// One line per cycle: `seq=k state=S fired=T weak=bool`.
pub fn dump_traces(model: &Model, traces: &[PathTrace]) -> String {
    let mut out = String::new();
    for t in traces {
        writeln!(out, "# trace {}", t.id).unwrap();
        for c in &t.cycles {
            writeln!(
                out,
                "seq={} state={} fired={} weak={}",
                c.sequence,
                model.states[c.entry].name,
                model.fired_label(c.fired),
                c.weak_fired
            )
            .unwrap();
        }
    }
    out
}
