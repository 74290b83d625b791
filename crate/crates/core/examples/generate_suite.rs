//! Generate a minimized SSM suite and print it with its statistics.
//!
//! `cargo run --example generate_suite -- [MODEL]`

use sspc_testgen::model::parse_model;
use sspc_testgen::pipeline::{generate, summary_line, GenerateOptions};
use sspc_testgen::suite::{emit_ssm, MinimizeMode};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/models/wing_mirror.smx").into());
    let model =
        parse_model(&std::fs::read_to_string(&path).expect("readable model")).expect("valid model");
    let opts = GenerateOptions::default();
    let g = generate(&model, &opts);
    print!("{}", emit_ssm(&model, &g.suite));
    println!();
    let stats = g.stats(&model, MinimizeMode::Full);
    println!("{}", summary_line(&stats));
    println!(
        "{}",
        serde_json::to_string_pretty(&stats).expect("serializable")
    );
}
