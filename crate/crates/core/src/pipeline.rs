//! End-to-end generation: explore, concretize, minimize, number.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::coverage::{percent, run_suite};
use crate::driver::{explore, trace_stats, Exploration, ExploreConfig, FaultReport, TraceStats};
use crate::fuzz::{fuzz, test_inputs, FuzzConfig};
use crate::model::Model;
use crate::solver::{Solver, SolverStats};
use crate::suite::{concretize, minimize, renumber, Concretized, MinimizeMode, TestCase};

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub explore: ExploreConfig,
    pub minimize: MinimizeMode,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            explore: ExploreConfig::default(),
            minimize: MinimizeMode::Full,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub exploration: Exploration,
    /// One test per concretized trace, in trace order.
    pub candidates: Vec<TestCase>,
    /// The emitted suite, ordered by trace id and numbered from 00001.
    pub suite: Vec<TestCase>,
    pub infeasible: usize,
    pub unresolved: usize,
    pub solver: SolverStats,
    pub elapsed: Duration,
}

pub fn generate(model: &Model, opts: &GenerateOptions) -> Generated {
    let start = Instant::now();
    let exploration = explore(model, &opts.explore);
    let mut solver = Solver::new(opts.explore.solver_budget);
    let (mut infeasible, mut unresolved) = (0, 0);
    let mut candidates = Vec::new();
    for t in &exploration.traces {
        match concretize(model, t, &mut solver) {
            Concretized::Test(tc) => candidates.push(tc),
            Concretized::Infeasible => infeasible += 1,
            Concretized::Unresolved => unresolved += 1,
        }
    }
    let mut suite = minimize(model, &candidates, opts.minimize);
    suite.sort_by_key(|t| t.trace);
    renumber(&mut suite);
    let mut stats = exploration.solver;
    stats.merge(&solver.stats);
    Generated {
        exploration,
        candidates,
        suite,
        infeasible,
        unresolved,
        solver: stats,
        elapsed: start.elapsed(),
    }
}

/// Contents of `stats.json`.
#[derive(Debug, Clone, Serialize)]
pub struct GenerateStats {
    pub model: String,
    pub minimize: MinimizeMode,
    pub time_s: f64,
    pub paths: usize,
    pub tests: usize,
    pub avg_steps: f64,
    pub max_steps: usize,
    pub exploration: TraceStats,
    pub solver: SolverStats,
    pub retained_on_timeout: usize,
    pub infeasible: usize,
    pub unconcretized: usize,
    pub truncated: bool,
    pub faults: Vec<FaultReport>,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

impl Generated {
    pub fn stats(&self, model: &Model, minimize: MinimizeMode) -> GenerateStats {
        let steps: Vec<usize> = self.suite.iter().map(|t| t.steps.len()).collect();
        let avg = if steps.is_empty() {
            0.0
        } else {
            steps.iter().sum::<usize>() as f64 / steps.len() as f64
        };
        GenerateStats {
            model: model.name.clone(),
            minimize,
            time_s: round2(self.elapsed.as_secs_f64()),
            paths: self.exploration.traces.len(),
            tests: self.suite.len(),
            avg_steps: round2(avg),
            max_steps: steps.into_iter().max().unwrap_or(0),
            exploration: trace_stats(
                &self.exploration.traces,
                self.exploration.elapsed,
                self.exploration.solver,
            ),
            solver: self.solver,
            retained_on_timeout: self.exploration.retained_on_timeout,
            infeasible: self.infeasible,
            unconcretized: self.unresolved,
            truncated: self.exploration.truncated,
            faults: self.exploration.faults.clone(),
        }
    }
}

/// One-line console summary: time, paths, tests, average and max steps.
pub fn summary_line(s: &GenerateStats) -> String {
    format!(
        "{}: time {:.2}s, {} paths, {} tests, steps avg {:.2} max {}",
        s.model, s.time_s, s.paths, s.tests, s.avg_steps, s.max_steps
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzRow {
    pub rng_seed: u64,
    pub hit: usize,
    pub percent: u32,
    pub tests: usize,
    /// Symbolic percent minus fuzz percent.
    pub gap: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub model: String,
    pub total: usize,
    pub symbolic_hit: usize,
    pub symbolic_percent: u32,
    pub symbolic_tests: usize,
    pub fuzz_budget: u64,
    pub fuzz: Vec<FuzzRow>,
}

/// Generates a symbolic suite, then fuzzes from its first test once per
/// rng seed, scoring both on the same objectives.
pub fn compare(
    model: &Model,
    opts: &GenerateOptions,
    budget: u64,
    rng_seeds: &[u64],
) -> Comparison {
    let generated = generate(model, opts);
    let report = run_suite(model, &generated.suite).expect("generated suite replays");
    let seeds: Vec<_> = generated
        .suite
        .first()
        .map(|t| vec![test_inputs(model, t)])
        .unwrap_or_default();
    let fuzz_rows = rng_seeds
        .iter()
        .map(|&rng_seed| {
            let r = fuzz(
                model,
                &seeds,
                &FuzzConfig {
                    iterations: budget,
                    rng_seed,
                },
            );
            let p = percent(r.hit, r.total);
            FuzzRow {
                rng_seed,
                hit: r.hit,
                percent: p,
                tests: r.tests.len(),
                gap: report.percent as i64 - p as i64,
            }
        })
        .collect();
    Comparison {
        model: model.name.clone(),
        total: report.total,
        symbolic_hit: report.hit,
        symbolic_percent: report.percent,
        symbolic_tests: generated.suite.len(),
        fuzz_budget: budget,
        fuzz: fuzz_rows,
    }
}

pub fn render_comparison(c: &Comparison) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{} ({} objectives, fuzz budget {} iterations)",
        c.model, c.total, c.fuzz_budget
    )
    .unwrap();
    writeln!(
        out,
        "{:<12} {:>8} {:>8} {:>6} {:>6}",
        "technique", "hit", "cov %", "tests", "diff."
    )
    .unwrap();
    writeln!(
        out,
        "{:<12} {:>8} {:>8} {:>6} {:>6}",
        "symbolic", c.symbolic_hit, c.symbolic_percent, c.symbolic_tests, "-"
    )
    .unwrap();
    for r in &c.fuzz {
        writeln!(
            out,
            "{:<12} {:>8} {:>8} {:>6} {:>6}",
            format!("fuzz/{}", r.rng_seed),
            r.hit,
            r.percent,
            r.tests,
            r.gap
        )
        .unwrap();
    }
    out
}
