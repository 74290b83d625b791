//! Coverage-guided mutation fuzzing over input sequences, as a baseline
//! for the symbolic generator.
//!
//! Each step encodes every primitive input leaf in the fewest bytes that
//! hold its domain size, little-endian; decoding maps raw bytes into the
//! domain as `lo + raw mod size`. Mutations are stacked bit flips, byte
//! randomization, step duplication and step truncation. Queue entries are
//! picked round-robin and a mutant is admitted when it increases the
//! cumulative objective hit set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coverage::CoverageTracker;
use crate::model::{default_values, eval_cycle, Model, Ty, Value};
use crate::suite::{input_slots, output_slots, renumber, TestCase, TestStep};

fn leaf_types(ty: &Ty, out: &mut Vec<Ty>) {
    match ty {
        Ty::Array(elem, len) => (0..*len).for_each(|_| leaf_types(elem, out)),
        Ty::Record(r) => r.fields.iter().for_each(|(_, t)| leaf_types(t, out)),
        t => out.push(t.clone()),
    }
}

fn width(ty: &Ty) -> usize {
    let max = ty.cardinality().saturating_sub(1);
    let bits = 128 - max.leading_zeros() as usize;
    bits.div_ceil(8).max(1)
}

/// Byte layout of one step.
#[derive(Debug, Clone)]
pub struct Layout {
    leaves: Vec<(Ty, usize)>,
    pub step_bytes: usize,
}

impl Layout {
    pub fn new(model: &Model) -> Layout {
        let mut types = Vec::new();
        for v in &model.inputs {
            leaf_types(&v.ty, &mut types);
        }
        let leaves: Vec<(Ty, usize)> = types
            .into_iter()
            .map(|t| {
                let w = width(&t);
                (t, w)
            })
            .collect();
        let step_bytes = leaves.iter().map(|(_, w)| w).sum();
        Layout { leaves, step_bytes }
    }
}

/// Encodes a sequence of per-step input records.
pub fn encode(model: &Model, steps: &[Vec<Value>]) -> Vec<u8> {
    let layout = Layout::new(model);
    let mut out = Vec::with_capacity(layout.step_bytes * steps.len());
    for step in steps {
        let leaves: Vec<&Value> = step.iter().flat_map(Value::leaves).collect();
        for (v, (ty, w)) in leaves.into_iter().zip(&layout.leaves) {
            let (lo, _) = ty.code_range().expect("scalar leaf");
            let raw = (v.code().expect("scalar") as i128 - lo as i128) as u128;
            out.extend_from_slice(&raw.to_le_bytes()[..*w]);
        }
    }
    out
}

/// Decodes whole steps from `bytes`; a trailing partial step is ignored.
/// Total: every leaf is reduced into its domain.
pub fn decode(model: &Model, bytes: &[u8]) -> Vec<Vec<Value>> {
    let layout = Layout::new(model);
    if layout.step_bytes == 0 {
        return Vec::new();
    }
    bytes
        .chunks_exact(layout.step_bytes)
        .map(|chunk| {
            let mut at = 0;
            let codes: Vec<i64> = layout
                .leaves
                .iter()
                .map(|(ty, w)| {
                    let mut buf = [0u8; 16];
                    buf[..*w].copy_from_slice(&chunk[at..at + w]);
                    at += w;
                    let raw = u128::from_le_bytes(buf);
                    let (lo, _) = ty.code_range().expect("scalar leaf");
                    (lo as i128 + (raw % ty.cardinality()) as i128) as i64
                })
                .collect();
            let mut it = codes.into_iter();
            model
                .inputs
                .iter()
                .map(|v| crate::model::enumerate::assemble(&v.ty, &mut it))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    /// Number of mutants to execute.
    pub iterations: u64,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueueEntry {
    pub bytes: Vec<u8>,
    /// Objectives newly hit when the entry was admitted.
    pub gained: usize,
}

#[derive(Debug, Clone)]
pub struct FuzzResult {
    pub queue: Vec<QueueEntry>,
    pub tests: Vec<TestCase>,
    pub hit: usize,
    pub total: usize,
    pub executions: u64,
    pub tracker: CoverageTracker,
}

/// Runs `steps` from the initial state, crediting `tracker`. Stops at the
/// first fault.
fn execute(model: &Model, steps: &[Vec<Value>], tracker: &mut CoverageTracker) -> usize {
    let mut state = model.initial;
    let mut outputs = default_values(model);
    let mut gained = 0;
    for inputs in steps {
        let Ok(r) = eval_cycle(model, state, inputs, &outputs) else {
            break;
        };
        gained += tracker.observe_cycle(state, &r);
        state = r.next;
        outputs = r.outputs;
    }
    gained
}

fn mutate(bytes: &[u8], step_bytes: usize, max_steps: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut out = bytes.to_vec();
    let ops = 1 << rng.gen_range(0..3);
    for _ in 0..ops {
        let steps = out.len() / step_bytes;
        match rng.gen_range(0..4) {
            0 if !out.is_empty() => {
                let bit = rng.gen_range(0..out.len() * 8);
                out[bit / 8] ^= 1 << (bit % 8);
            }
            1 if !out.is_empty() => {
                let i = rng.gen_range(0..out.len());
                out[i] = rng.gen();
            }
            2 if steps < max_steps && steps > 0 => {
                let s = rng.gen_range(0..steps);
                let chunk = out[s * step_bytes..(s + 1) * step_bytes].to_vec();
                let at = (s + 1) * step_bytes;
                out.splice(at..at, chunk);
            }
            3 if steps > 1 => {
                out.truncate((steps - 1) * step_bytes);
            }
            _ => {}
        }
    }
    out
}

fn to_test(model: &Model, steps: &[Vec<Value>]) -> TestCase {
    let (ins, outs) = (input_slots(model), output_slots(model));
    let mut state = model.initial;
    let mut outputs = default_values(model);
    let mut out = Vec::new();
    for inputs in steps {
        let Ok(r) = eval_cycle(model, state, inputs, &outputs) else {
            break;
        };
        out.push(TestStep {
            sets: ins
                .iter()
                .map(|s| (s.path.clone(), s.get(inputs)))
                .collect(),
            checks: outs
                .iter()
                .map(|s| (s.path.clone(), s.get(&r.outputs)))
                .collect(),
        });
        state = r.next;
        outputs = r.outputs;
    }
    TestCase {
        id: String::new(),
        steps: out,
        trace: None,
    }
}

/// Concrete input records of each step of `test`.
pub fn test_inputs(model: &Model, test: &TestCase) -> Vec<Vec<Value>> {
    let ins = input_slots(model);
    test.steps
        .iter()
        .map(|step| {
            let mut vals: Vec<Value> = model.inputs.iter().map(|v| v.ty.first_value()).collect();
            for (path, v) in &step.sets {
                if let Some(s) = ins.iter().find(|s| s.path == *path) {
                    s.set(&mut vals, v.clone());
                }
            }
            vals
        })
        .collect()
}

/// Deterministic for a given model, seed list and config.
pub fn fuzz(model: &Model, seeds: &[Vec<Vec<Value>>], config: &FuzzConfig) -> FuzzResult {
    let layout = Layout::new(model);
    let max_steps = 2 * model.states.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut tracker = CoverageTracker::new(model);
    let mut queue = Vec::new();

    for seed in seeds {
        let seed = &seed[..seed.len().min(max_steps)];
        let gained = execute(model, seed, &mut tracker);
        if gained > 0 {
            queue.push(QueueEntry {
                bytes: encode(model, seed),
                gained,
            });
        }
    }
    let mut executions = 0;
    if !queue.is_empty() && layout.step_bytes > 0 {
        for next in 0..config.iterations as usize {
            let parent = &queue[next % queue.len()].bytes;
            let mutant = mutate(parent, layout.step_bytes, max_steps, &mut rng);
            let steps = decode(model, &mutant);
            if steps.is_empty() {
                continue;
            }
            let mut trial = tracker.clone();
            executions += 1;
            let gained = execute(model, &steps, &mut trial);
            if gained > 0 {
                tracker = trial;
                queue.push(QueueEntry {
                    bytes: encode(model, &steps),
                    gained,
                });
            }
        }
    }

    let mut tests: Vec<TestCase> = queue
        .iter()
        .map(|q| to_test(model, &decode(model, &q.bytes)))
        .collect();
    renumber(&mut tests);
    FuzzResult {
        hit: tracker.hit_count(),
        total: tracker.objectives().len(),
        queue,
        tests,
        executions,
        tracker,
    }
}
