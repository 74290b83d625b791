//! Shared helpers: corpus access and random model generation.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sspc_testgen::driver::{explore, ExploreConfig};
use sspc_testgen::model::{parse_model, Model};

pub const WING: &str = include_str!("../../models/wing_mirror.smx");
pub const NARROW: &str = include_str!("../../models/narrow_guard.smx");
pub const MCDC_GAP: &str = include_str!("../../models/mcdc_gap.smx");
pub const SINGLE_STRONG: &str = include_str!("../../models/single_strong.smx");
pub const SINGLE_WEAK: &str = include_str!("../../models/single_weak.smx");
pub const LEVEL_CROSSING: &str = include_str!("../../models/level_crossing.smx");

pub const CORPUS: [(&str, &str); 6] = [
    ("wing_mirror", WING),
    ("narrow_guard", NARROW),
    ("mcdc_gap", MCDC_GAP),
    ("single_strong", SINGLE_STRONG),
    ("single_weak", SINGLE_WEAK),
    ("level_crossing", LEVEL_CROSSING),
];

pub fn model(text: &str) -> Model {
    parse_model(text).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

pub fn models_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("models")
}

// Input domain: 2 * 2 * 8 * 4 * 3 * 2 * 3^2 = 6912 valuations per cycle.
const HEADER: &str = "  enum Mode { A, B, C }
  input a: bool
  input b: bool
  input x: int(0, 7)
  input y: int(0, 3)
  input mode: Mode
  input i: int(0, 1)
  input arr: int(0, 2)[2]

  output o: int(0, 9) = 0
  output f: bool = false
  output m: Mode = A
  output buf: int(0, 2)[2] = [0, 0]
";

fn atom(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..9) {
        0 => "a".into(),
        1 => "b".into(),
        2 => format!("x == {}", rng.gen_range(0..8)),
        3 => format!("x > {}", rng.gen_range(0..7)),
        4 => format!("x + y < {}", rng.gen_range(1..10)),
        5 => format!("arr[i] == {}", rng.gen_range(0..3)),
        6 => format!("mode == {}", ["A", "B", "C"].choose(rng).unwrap()),
        7 => format!("o > {}", rng.gen_range(0..4)),
        _ => "f".into(),
    }
}

fn guard(rng: &mut ChaCha8Rng, depth: u32) -> String {
    guard_in(rng, depth, &mut Vec::new())
}

// Atoms within one guard must be distinct.
fn guard_in(rng: &mut ChaCha8Rng, depth: u32, used: &mut Vec<String>) -> String {
    if depth == 0 || rng.gen_bool(0.5) {
        let a = loop {
            let a = atom(rng);
            if !used.contains(&a) {
                break a;
            }
        };
        used.push(a.clone());
        return if rng.gen_bool(0.2) {
            format!("!({a})")
        } else {
            a
        };
    }
    let op = if rng.gen_bool(0.5) { "&&" } else { "||" };
    let l = guard_in(rng, depth - 1, used);
    let r = guard_in(rng, depth - 1, used);
    format!("({l} {op} {r})")
}

fn stmt(rng: &mut ChaCha8Rng, depth: u32, out: &mut String, indent: &str) {
    match rng.gen_range(0..if depth > 0 { 7 } else { 6 }) {
        0 => out.push_str(&format!("{indent}o := {}\n", rng.gen_range(0..10))),
        // Can leave int(0, 9) and fault.
        1 => out.push_str(&format!("{indent}o := o + {}\n", rng.gen_range(1..4))),
        2 => out.push_str(&format!("{indent}o := y + {}\n", rng.gen_range(0..7))),
        3 => out.push_str(&format!("{indent}f := {}\n", atom(rng))),
        4 => out.push_str(&format!("{indent}buf[i] := arr[{}]\n", rng.gen_range(0..2))),
        5 => out.push_str(&format!("{indent}m := mode\n")),
        _ => {
            out.push_str(&format!("{indent}if {} {{\n", guard(rng, 1)));
            let inner = format!("{indent}  ");
            stmt(rng, depth - 1, out, &inner);
            if rng.gen_bool(0.5) {
                out.push_str(&format!("{indent}}} else {{\n"));
                stmt(rng, depth - 1, out, &inner);
            }
            out.push_str(&format!("{indent}}}\n"));
        }
    }
}

/// A random model with at most 4 states, 5 transitions and a per-cycle
/// input domain of 6912 valuations.
pub fn random_model_text(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_states = rng.gen_range(1..=4);
    let n_trans = rng.gen_range(0..=5);
    let mut s = format!("model Random{seed} {{\n{HEADER}\n");
    for k in 0..n_states {
        let init = if k == 0 { "initial " } else { "" };
        s.push_str(&format!("  {init}state S{k} {{\n"));
        for _ in 0..rng.gen_range(0..3) {
            stmt(&mut rng, 1, &mut s, "    ");
        }
        s.push_str("  }\n");
    }
    for _ in 0..n_trans {
        let (from, to) = (rng.gen_range(0..n_states), rng.gen_range(0..n_states));
        let kind = if rng.gen_bool(0.35) { "weak" } else { "strong" };
        s.push_str(&format!(
            "  transition S{from} -> S{to} {kind} when {}\n",
            guard(&mut rng, 2)
        ));
    }
    s.push_str("}\n");
    s
}

/// Paths allowed in a sampled model's exploration. Larger models are
/// resampled so the properties stay fast.
pub const MAX_RANDOM_PATHS: usize = 2000;

pub fn random_model(seed: u64) -> Model {
    random_model_source(seed).1
}

/// The accepted model for `seed` together with its source text.
pub fn random_model_source(seed: u64) -> (String, Model) {
    let mut seed = seed;
    loop {
        let text = random_model_text(seed);
        let m = model(&text);
        let cfg = ExploreConfig {
            max_paths: Some(MAX_RANDOM_PATHS),
            ..ExploreConfig::default()
        };
        if !explore(&m, &cfg).truncated {
            return (text, m);
        }
        seed = seed.wrapping_add(0x9E3779B97F4A7C15);
    }
}

// ---- random path conditions ----

use std::collections::BTreeMap;
use std::sync::Arc;

use sspc_testgen::model::{BinOp, CondTree, EnumDef, Ty, Value};
use sspc_testgen::sym::{eval_under, Assignment, SymExpr, Symbol};

/// Scalar symbols over at most 12 leaves with a joint domain of at most
/// 4096 valuations.
pub fn random_symbols(rng: &mut impl Rng) -> Vec<Arc<Symbol>> {
    let want = rng.gen_range(1..=12);
    let mut product: u128 = 1;
    let mut out = Vec::new();
    for k in 0..want {
        let ty = if rng.gen_bool(0.3) {
            Ty::Bool
        } else if rng.gen_bool(0.25) {
            let n = rng.gen_range(2..=4);
            Ty::Enum(Arc::new(EnumDef {
                name: format!("E{n}"),
                variants: (0..n).map(|v| format!("V{v}")).collect(),
            }))
        } else {
            let lo = rng.gen_range(-3..=3);
            Ty::Int {
                lo,
                hi: lo + rng.gen_range(0..=5),
            }
        };
        let ty = if product * ty.cardinality() <= 4096 {
            ty
        } else if product * 2 <= 4096 {
            Ty::Bool
        } else {
            break;
        };
        product *= ty.cardinality();
        out.push(Symbol::new(format!("inC.s{k}"), ty, 1));
    }
    out
}

fn int_term(rng: &mut impl Rng, syms: &[Arc<Symbol>], depth: u32) -> SymExpr {
    let ints: Vec<&Arc<Symbol>> = syms
        .iter()
        .filter(|s| matches!(s.ty, Ty::Int { .. }))
        .collect();
    let leaf = depth == 0 || rng.gen_bool(0.35);
    if leaf {
        if !ints.is_empty() && rng.gen_bool(0.75) {
            return SymExpr::sym(ints.choose(rng).unwrap());
        }
        return SymExpr::Const(Value::Int(rng.gen_range(-4..=6)));
    }
    match rng.gen_range(0..5) {
        0 => SymExpr::binary(
            BinOp::Add,
            int_term(rng, syms, depth - 1),
            int_term(rng, syms, depth - 1),
        ),
        1 => SymExpr::binary(
            BinOp::Sub,
            int_term(rng, syms, depth - 1),
            int_term(rng, syms, depth - 1),
        ),
        2 => SymExpr::binary(
            BinOp::Mul,
            int_term(rng, syms, depth - 1),
            int_term(rng, syms, depth - 1),
        ),
        3 => SymExpr::ite(
            bool_term(rng, syms, depth - 1),
            int_term(rng, syms, depth - 1),
            int_term(rng, syms, depth - 1),
        ),
        _ => {
            // Index symbols whose whole range is a valid array index.
            let idx: Vec<&&Arc<Symbol>> = ints
                .iter()
                .filter(|s| matches!(s.ty, Ty::Int { lo, .. } if lo >= 0))
                .collect();
            match idx.choose(rng) {
                Some(s) => {
                    let Ty::Int { hi, .. } = s.ty else {
                        unreachable!()
                    };
                    let elems = (0..=hi).map(|_| int_term(rng, syms, depth - 1)).collect();
                    SymExpr::select(elems, SymExpr::sym(s))
                }
                None => int_term(rng, syms, 0),
            }
        }
    }
}

fn bool_term(rng: &mut impl Rng, syms: &[Arc<Symbol>], depth: u32) -> SymExpr {
    let ints: Vec<&Arc<Symbol>> = syms
        .iter()
        .filter(|s| matches!(s.ty, Ty::Int { .. }))
        .collect();
    let bools: Vec<&Arc<Symbol>> = syms.iter().filter(|s| s.ty == Ty::Bool).collect();
    let enums: Vec<&Arc<Symbol>> = syms
        .iter()
        .filter(|s| matches!(s.ty, Ty::Enum(_)))
        .collect();
    if depth == 0 || rng.gen_bool(0.3) {
        if !bools.is_empty() && rng.gen_bool(0.3) {
            return SymExpr::sym(bools.choose(rng).unwrap());
        }
        if !enums.is_empty() && rng.gen_bool(0.3) {
            let e = enums.choose(rng).unwrap();
            let (lo, hi) = e.ty.code_range().unwrap();
            let c = SymExpr::Const(Value::from_code(&e.ty, rng.gen_range(lo..=hi)));
            let op = if rng.gen_bool(0.5) {
                BinOp::Eq
            } else {
                BinOp::Ne
            };
            return SymExpr::binary(op, SymExpr::sym(e), c);
        }
        if !ints.is_empty() && rng.gen_bool(0.3) {
            // Shapes that unit propagation handles directly.
            let op = *[
                BinOp::Eq,
                BinOp::Ne,
                BinOp::Lt,
                BinOp::Le,
                BinOp::Gt,
                BinOp::Ge,
            ]
            .choose(rng)
            .unwrap();
            let c = SymExpr::Const(Value::Int(rng.gen_range(-4..=8)));
            return SymExpr::binary(op, SymExpr::sym(ints.choose(rng).unwrap()), c);
        }
        let op = *[
            BinOp::Eq,
            BinOp::Ne,
            BinOp::Lt,
            BinOp::Le,
            BinOp::Gt,
            BinOp::Ge,
        ]
        .choose(rng)
        .unwrap();
        let d = depth.min(2);
        return SymExpr::binary(op, int_term(rng, syms, d), int_term(rng, syms, d));
    }
    match rng.gen_range(0..3) {
        0 => SymExpr::not(bool_term(rng, syms, depth - 1)),
        1 => SymExpr::binary(
            BinOp::And,
            bool_term(rng, syms, depth - 1),
            bool_term(rng, syms, depth - 1),
        ),
        _ => SymExpr::binary(
            BinOp::Or,
            bool_term(rng, syms, depth - 1),
            bool_term(rng, syms, depth - 1),
        ),
    }
}

/// One to eight random boolean conjuncts over `random_symbols`, sometimes
/// repeating one.
pub fn random_pc(rng: &mut impl Rng) -> Vec<SymExpr> {
    let syms = random_symbols(rng);
    let mut pc: Vec<SymExpr> = (0..rng.gen_range(1..=8))
        .map(|_| {
            let depth = rng.gen_range(0..=3);
            bool_term(rng, &syms, depth)
        })
        .collect();
    if rng.gen_bool(0.2) {
        let dup = pc.choose(rng).unwrap().clone();
        pc.push(dup);
    }
    pc
}

pub fn pc_symbols(pc: &[SymExpr]) -> Vec<Arc<Symbol>> {
    let mut seen = BTreeMap::new();
    for e in pc {
        for s in e.symbols() {
            seen.entry(s.id.clone()).or_insert(s);
        }
    }
    seen.into_values().collect()
}

pub fn holds(pc: &[SymExpr], a: &Assignment) -> bool {
    pc.iter()
        .all(|e| eval_under(a, e).ok().and_then(|v| v.as_bool()) == Some(true))
}

/// First satisfying assignment in enumeration order, by brute force.
pub fn exhaustive(pc: &[SymExpr]) -> Option<Assignment> {
    let syms = pc_symbols(pc);
    let doms: Vec<Vec<Value>> = syms
        .iter()
        .map(|s| {
            let (lo, hi) = s.ty.code_range().expect("scalar symbol");
            (lo..=hi).map(|c| Value::from_code(&s.ty, c)).collect()
        })
        .collect();
    let mut idx = vec![0usize; syms.len()];
    loop {
        let a: Assignment = syms
            .iter()
            .zip(&idx)
            .enumerate()
            .map(|(k, (s, &i))| (s.id.clone(), doms[k][i].clone()))
            .collect();
        if holds(pc, &a) {
            return Some(a);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return None;
            }
            idx[k] += 1;
            if idx[k] < doms[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

// ---- random guards ----

/// A guard tree over conditions `0..n`, each used exactly once.
pub fn random_cond_tree(rng: &mut impl Rng, n: usize) -> CondTree {
    let mut atoms: Vec<usize> = (0..n).collect();
    atoms.shuffle(rng);
    fn build(rng: &mut impl Rng, atoms: &[usize]) -> CondTree {
        let t = if atoms.len() == 1 {
            CondTree::Atom(atoms[0])
        } else {
            let cut = rng.gen_range(1..atoms.len());
            let (l, r) = (build(rng, &atoms[..cut]), build(rng, &atoms[cut..]));
            if rng.gen_bool(0.5) {
                CondTree::And(Box::new(l), Box::new(r))
            } else {
                CondTree::Or(Box::new(l), Box::new(r))
            }
        };
        if rng.gen_bool(0.2) {
            CondTree::Not(Box::new(t))
        } else {
            t
        }
    }
    build(rng, &atoms)
}

pub fn random_vectors(rng: &mut impl Rng, n: usize) -> Vec<Vec<bool>> {
    (0..rng.gen_range(0..=(1usize << n) + 2))
        .map(|_| (0..n).map(|_| rng.gen_bool(0.5)).collect())
        .collect()
}
