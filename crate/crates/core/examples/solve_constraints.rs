//! Build path conditions by hand and decide them.

use std::time::Duration;

use sspc_testgen::model::{BinOp, Ty, Value};
use sspc_testgen::solver::{solve, SolveResult};
use sspc_testgen::sym::{SymExpr, Symbol};

fn show(name: &str, pc: &[SymExpr]) {
    match solve(pc, Duration::from_millis(100)) {
        SolveResult::Sat(a) => {
            let vals: Vec<String> = a
                .iter()
                .map(|(k, v)| format!("{} = {v:?}", k.path))
                .collect();
            println!("{name}: sat, {}", vals.join(", "));
        }
        SolveResult::Unsat => println!("{name}: unsat"),
        SolveResult::Timeout => println!("{name}: timeout"),
    }
}

fn main() {
    let int = Ty::Int { lo: 0, hi: 1000 };
    let x = SymExpr::sym(&Symbol::new("inC.x", int.clone(), 1));
    let y = SymExpr::sym(&Symbol::new("inC.y", int, 1));
    let c = |n| SymExpr::Const(Value::Int(n));

    show("x == 742", &[SymExpr::eq(x.clone(), c(742))]);
    show(
        "x == 5 && x == 6",
        &[SymExpr::eq(x.clone(), c(5)), SymExpr::eq(x.clone(), c(6))],
    );
    show(
        "x + y == 1500 && x > y",
        &[
            SymExpr::eq(SymExpr::binary(BinOp::Add, x.clone(), y.clone()), c(1500)),
            SymExpr::binary(BinOp::Gt, x.clone(), y.clone()),
        ],
    );
    // Symbolic array index: [3, 7, 9][i] == 9.
    let i = SymExpr::sym(&Symbol::new("inC.i", Ty::Int { lo: 0, hi: 2 }, 1));
    show(
        "[3, 7, 9][i] == 9",
        &[SymExpr::eq(
            SymExpr::select(vec![c(3), c(7), c(9)], i),
            c(9),
        )],
    );
}
