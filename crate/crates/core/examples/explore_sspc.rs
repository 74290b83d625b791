//! Explore all single-state paths of a model and dump the traces.
//!
//! `cargo run --example explore_sspc -- [MODEL]`

use sspc_testgen::driver::{dump_traces, explore, trace_stats, ExploreConfig};
use sspc_testgen::model::parse_model;
use sspc_testgen::oracle::brute_force_reach;

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/models/wing_mirror.smx").into());
    let model =
        parse_model(&std::fs::read_to_string(&path).expect("readable model")).expect("valid model");
    let ex = explore(&model, &ExploreConfig::default());
    print!("{}", dump_traces(&model, &ex.traces));
    let stats = trace_stats(&ex.traces, ex.elapsed, ex.solver);
    println!(
        "{} paths, avg {} / max {} cycles, {} solver queries",
        stats.paths, stats.avg_steps, stats.max_steps, stats.solver.queries
    );
    if let Ok(reach) = brute_force_reach(&model, None) {
        let found: std::collections::BTreeSet<_> =
            ex.traces.iter().map(|t| t.signature()).collect();
        println!(
            "matches brute-force enumeration: {}",
            found == reach.signatures
        );
    }
}
