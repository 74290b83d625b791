//! Run the mutation fuzzer from a single seed and show the queue growth.
//!
//! `cargo run --example fuzz_baseline -- [MODEL] [BUDGET] [RNG_SEED]`

use sspc_testgen::fuzz::{encode, fuzz, test_inputs, FuzzConfig};
use sspc_testgen::model::parse_model;
use sspc_testgen::pipeline::{generate, GenerateOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/models/level_crossing.smx").into()
    });
    let budget = args.next().and_then(|s| s.parse().ok()).unwrap_or(5_000);
    let rng_seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let model =
        parse_model(&std::fs::read_to_string(&path).expect("readable model")).expect("valid model");
    let suite = generate(&model, &GenerateOptions::default()).suite;
    let seeds: Vec<_> = suite
        .first()
        .map(|t| test_inputs(&model, t))
        .into_iter()
        .collect();
    for s in &seeds {
        let bytes: Vec<String> = encode(&model, s)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        println!("seed bytes: {}", bytes.join(" "));
    }
    let r = fuzz(
        &model,
        &seeds,
        &FuzzConfig {
            iterations: budget,
            rng_seed,
        },
    );
    for (i, q) in r.queue.iter().enumerate() {
        println!(
            "queue[{i}]: {} bytes, +{} objectives",
            q.bytes.len(),
            q.gained
        );
    }
    println!(
        "{} executions, {}/{} objectives",
        r.executions, r.hit, r.total
    );
}
