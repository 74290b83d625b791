//! The restricted synchronous state-machine language: syntax, validation
//! and the concrete cycle interpreter.

pub mod ast;
mod check;
pub mod diag;
pub(crate) mod enumerate;
pub(crate) mod interp;
pub mod parser;
pub mod types;

use std::fmt;
use std::sync::Arc;

pub use ast::{BinOp, Pos, TransitionKind, UnOp};
pub use diag::{Diagnostic, Severity};
pub use enumerate::{enumerate_inputs, input_domain_size, EnumerateError, DEFAULT_ENUMERATION_CAP};
pub use interp::{default_values, eval_cycle, eval_expr, CycleResult, Fault, GuardEval};
pub use types::{leaf_paths, EnumDef, RecordDef, Ty, Value};

pub type StateId = usize;
pub type TransitionId = usize;

/// Which transition a cycle took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fired {
    /// No guard held; the machine stayed in its state.
    SelfLoop,
    Transition(TransitionId),
}

impl Fired {
    pub fn transition(self) -> Option<TransitionId> {
        match self {
            Fired::SelfLoop => None,
            Fired::Transition(t) => Some(t),
        }
    }
}

/// A typed expression. Integer expressions carry their value interval in `ty`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub ty: Ty,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Const(Value),
    Input(usize),
    Output(usize),
    /// Loop counter slot within the enclosing state body.
    LoopVar(usize),
    Field(Box<Expr>, usize),
    Index(Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Access {
    Field(usize),
    Index(Expr),
}

/// Assignment target: an output followed by field/index accesses.
#[derive(Debug, Clone, PartialEq)]
pub struct Place {
    pub output: usize,
    pub path: Vec<Access>,
    pub ty: Ty,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Assign {
        target: Place,
        value: Expr,
        pos: Pos,
    },
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    /// `for var in lo..hi`, upper bound exclusive.
    For {
        var: usize,
        lo: i64,
        hi: i64,
        body: Vec<Stmt>,
    },
}

/// Boolean structure of a guard over its atomic conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CondTree {
    Atom(usize),
    Not(Box<CondTree>),
    And(Box<CondTree>, Box<CondTree>),
    Or(Box<CondTree>, Box<CondTree>),
}

impl CondTree {
    pub fn eval(&self, vector: &[bool]) -> bool {
        match self {
            CondTree::Atom(i) => vector[*i],
            CondTree::Not(c) => !c.eval(vector),
            CondTree::And(a, b) => a.eval(vector) && b.eval(vector),
            CondTree::Or(a, b) => a.eval(vector) || b.eval(vector),
        }
    }
}

/// A transition guard split into atomic conditions (maximal subexpressions
/// without `!`, `&&`, `||`).
#[derive(Debug, Clone, PartialEq)]
pub struct Guard {
    pub expr: Expr,
    pub atoms: Vec<Expr>,
    pub tree: CondTree,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub ty: Ty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputVar {
    pub name: String,
    pub ty: Ty,
    pub default: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub name: String,
    pub body: Vec<Stmt>,
    /// Outgoing transitions in priority (declaration) order.
    pub outgoing: Vec<TransitionId>,
    /// Number of loop counter slots used by `body`.
    pub loop_slots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub id: TransitionId,
    pub source: StateId,
    pub target: StateId,
    pub kind: TransitionKind,
    pub guard: Guard,
}

/// A validated model. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub name: String,
    pub enums: Vec<Arc<EnumDef>>,
    pub records: Vec<Arc<RecordDef>>,
    pub inputs: Vec<Variable>,
    pub outputs: Vec<OutputVar>,
    pub states: Vec<State>,
    pub initial: StateId,
    pub transitions: Vec<Transition>,
}

impl Model {
    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|v| v.name == name)
    }

    pub fn output_index(&self, name: &str) -> Option<usize> {
        self.outputs.iter().position(|v| v.name == name)
    }

    /// `T<id>:<source>-><target>`
    pub fn transition_label(&self, id: TransitionId) -> String {
        let t = &self.transitions[id];
        format!(
            "T{id}:{}->{}",
            self.states[t.source].name, self.states[t.target].name
        )
    }

    pub fn fired_label(&self, fired: Fired) -> String {
        match fired {
            Fired::SelfLoop => "self".to_string(),
            Fired::Transition(t) => self.transition_label(t),
        }
    }

    /// Primitive input leaves per cycle.
    pub fn input_leaf_count(&self) -> usize {
        self.inputs.iter().map(|v| v.ty.leaf_count()).sum()
    }
}

/// Errors from [`parse_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelErrors(pub Vec<Diagnostic>);

impl fmt::Display for ModelErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ModelErrors {}

/// Parses and resolves a model file. Never panics on malformed input.
pub fn parse_model(text: &str) -> Result<Model, ModelErrors> {
    let decl = parser::parse_syntax(text).map_err(|d| ModelErrors(vec![d]))?;
    let (model, diags) = check::resolve(&decl);
    match model {
        Some(m) if diags.iter().all(|d| d.severity != Severity::Error) => Ok(m),
        _ => Err(ModelErrors(diags)),
    }
}

/// Checks a parsed model against every well-formedness rule and returns one
/// diagnostic per violation; empty means valid.
pub fn validate(decl: &ast::ModelDecl) -> Vec<Diagnostic> {
    check::resolve(decl).1
}
