//! Untyped syntax tree produced by the parser.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    And,
    Or,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SExpr {
    pub kind: SExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SExprKind {
    Int(i64),
    Bool(bool),
    Ident(String),
    Field(Box<SExpr>, String),
    Index(Box<SExpr>, Box<SExpr>),
    Unary(UnOp, Box<SExpr>),
    Binary(BinOp, Box<SExpr>, Box<SExpr>),
    ArrayLit(Vec<SExpr>),
    RecordLit(Vec<(String, SExpr)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypeExpr {
    Bool,
    Int(SExpr, SExpr),
    Named(String, Pos),
    Array(Box<TypeExpr>, SExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SStmt {
    Assign {
        target: SExpr,
        value: SExpr,
        pos: Pos,
    },
    If {
        cond: SExpr,
        then_branch: Vec<SStmt>,
        else_branch: Vec<SStmt>,
        pos: Pos,
    },
    For {
        var: String,
        lo: SExpr,
        hi: SExpr,
        body: Vec<SStmt>,
        pos: Pos,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionKind {
    Strong,
    Weak,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Const {
        name: String,
        value: SExpr,
        pos: Pos,
    },
    Enum {
        name: String,
        variants: Vec<(String, Pos)>,
        pos: Pos,
    },
    Type {
        name: String,
        fields: Vec<(String, TypeExpr, Pos)>,
        pos: Pos,
    },
    Input {
        name: String,
        ty: TypeExpr,
        pos: Pos,
    },
    Output {
        name: String,
        ty: TypeExpr,
        default: SExpr,
        pos: Pos,
    },
    State {
        name: String,
        initial: bool,
        body: Vec<SStmt>,
        pos: Pos,
    },
    Transition {
        source: (String, Pos),
        target: (String, Pos),
        kind: TransitionKind,
        guard: SExpr,
        pos: Pos,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDecl {
    pub name: String,
    pub items: Vec<Item>,
}
