//! Parse a model and run it concretely for a few cycles.
//!
//! `cargo run --example parse_and_simulate -- [MODEL]`

use sspc_testgen::model::{default_values, enumerate_inputs, eval_cycle, parse_model, Value};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/models/wing_mirror.smx").into());
    let text = std::fs::read_to_string(&path).expect("readable model");
    let model = match parse_model(&text) {
        Ok(m) => m,
        Err(errs) => {
            for d in &errs.0 {
                eprintln!("{}", d.render(&path));
            }
            std::process::exit(1);
        }
    };
    println!(
        "{}: {} states, {} transitions, {} inputs, {} outputs",
        model.name,
        model.states.len(),
        model.transitions.len(),
        model.inputs.len(),
        model.outputs.len()
    );

    // Walk the first few input valuations in enumeration order.
    let inputs: Vec<Vec<Value>> = enumerate_inputs(&model, None)
        .expect("enumerable domain")
        .take(4)
        .collect();
    let mut state = model.initial;
    let mut outputs = default_values(&model);
    for (k, iv) in inputs.iter().enumerate() {
        let r = eval_cycle(&model, state, iv, &outputs).expect("no fault");
        let shown: Vec<String> = model
            .outputs
            .iter()
            .zip(&r.outputs)
            .map(|(o, v)| format!("{}={}", o.name, v.display(&o.ty)))
            .collect();
        println!(
            "cycle {}: {} --{}--> {}  {}",
            k + 1,
            model.states[state].name,
            model.fired_label(r.fired),
            model.states[r.next].name,
            shown.join(" ")
        );
        state = r.next;
        outputs = r.outputs;
    }
}
