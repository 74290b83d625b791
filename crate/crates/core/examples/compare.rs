//! Symbolic generation versus the mutation fuzzer on the keypad model.
//!
//! `cargo run --example compare -- [MODEL] [BUDGET]`

use sspc_testgen::model::parse_model;
use sspc_testgen::pipeline::{compare, render_comparison, GenerateOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/models/narrow_guard.smx").into());
    let budget = args.next().and_then(|b| b.parse().ok()).unwrap_or(10_000);
    let text = std::fs::read_to_string(&path).expect("readable model");
    let model = parse_model(&text).expect("valid model");
    let c = compare(
        &model,
        &GenerateOptions::default(),
        budget,
        &[1, 2, 3, 4, 5],
    );
    print!("{}", render_comparison(&c));
}
