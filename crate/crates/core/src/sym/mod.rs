//! Symbolic values and one-cycle symbolic execution.

mod engine;
mod expr;

pub use engine::{
    fresh_symbols, initial_state, sym_defaults, sym_step, FaultPath, ForkMode, StepResult,
    Successor, SymState,
};
pub use expr::{eval_under, simplify, Assignment, EvalError, SymExpr, SymValue, Symbol, SymbolId};
