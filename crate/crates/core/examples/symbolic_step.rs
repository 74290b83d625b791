//! One symbolic cycle from the initial state: successors and their path
//! conditions.
//!
//! `cargo run --example symbolic_step -- [MODEL]`

use sspc_testgen::model::parse_model;
use sspc_testgen::solver::Solver;
use sspc_testgen::sym::{initial_state, sym_step, ForkMode};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/models/wing_mirror.smx").into());
    let model =
        parse_model(&std::fs::read_to_string(&path).expect("readable model")).expect("valid model");
    let start = initial_state(&model);
    let mut solver = Solver::default();
    for mode in [ForkMode::Condition, ForkMode::Decision] {
        let step = sym_step(&model, &start, mode, &mut solver);
        println!(
            "{mode:?}: {} successors, {} fault paths",
            step.successors.len(),
            step.faults.len()
        );
        for s in &step.successors {
            let pc: Vec<String> = s.state.pc.iter().map(|e| e.to_string()).collect();
            println!(
                "  {} -> {} (weak {})  pc: {}",
                model.fired_label(s.fired),
                model.states[s.state.state].name,
                s.weak_fired,
                if pc.is_empty() {
                    "true".into()
                } else {
                    pc.join(" && ")
                }
            );
        }
    }
    println!("solver queries: {}", solver.stats.queries);
}
