//! Replay an SSM script and report state, transition and MC/DC coverage.
//!
//! `cargo run --example measure_coverage -- [MODEL [SUITE.ssm]]`
//!
//! Without a script, a generated suite is replayed, then the same suite
//! with its last test dropped.

use sspc_testgen::coverage::{render_table, run_suite, run_suite_text};
use sspc_testgen::model::parse_model;
use sspc_testgen::pipeline::{generate, GenerateOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/models/mcdc_gap.smx").into());
    let model =
        parse_model(&std::fs::read_to_string(&path).expect("readable model")).expect("valid model");
    if let Some(script) = args.next() {
        let text = std::fs::read_to_string(script).expect("readable script");
        let report = run_suite_text(&model, &text).expect("valid script");
        print!("{}", render_table(&model, &report));
        return;
    }
    let mut suite = generate(&model, &GenerateOptions::default()).suite;
    print!(
        "{}",
        render_table(&model, &run_suite(&model, &suite).expect("replays"))
    );
    suite.pop();
    println!("\nwithout the last test:");
    print!(
        "{}",
        render_table(&model, &run_suite(&model, &suite).expect("replays"))
    );
}
