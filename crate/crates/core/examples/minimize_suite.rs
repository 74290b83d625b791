//! Compare suite sizes and coverage under the three minimization modes.
//!
//! `cargo run --example minimize_suite -- [MODEL]`

use sspc_testgen::coverage::run_suite;
use sspc_testgen::model::parse_model;
use sspc_testgen::pipeline::{generate, GenerateOptions};
use sspc_testgen::suite::MinimizeMode;

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/models/mcdc_gap.smx").into());
    let model =
        parse_model(&std::fs::read_to_string(&path).expect("readable model")).expect("valid model");
    println!("{:<8} {:>6} {:>6} {:>8}", "mode", "tests", "steps", "cov %");
    for mode in [MinimizeMode::Off, MinimizeMode::Full, MinimizeMode::Branch] {
        let g = generate(
            &model,
            &GenerateOptions {
                minimize: mode,
                ..Default::default()
            },
        );
        let report = run_suite(&model, &g.suite).expect("replays");
        let steps: usize = g.suite.iter().map(|t| t.steps.len()).sum();
        println!(
            "{:<8} {:>6} {:>6} {:>8}",
            format!("{mode:?}").to_lowercase(),
            g.suite.len(),
            steps,
            report.percent
        );
    }
}
